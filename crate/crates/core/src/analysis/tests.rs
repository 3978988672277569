use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::*;
use crate::eval::{MetricReport, MetricTable};

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Flat at zero, then rising `slope` per decade after `10^knot`.
fn knee(x: &[f64], knot: f64, slope: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    x.iter()
        .map(|v| {
            slope * (v.log10() - knot).max(0.0)
                + if sigma > 0.0 {
                    noise.sample(&mut rng)
                } else {
                    0.0
                }
        })
        .collect()
}

fn sigmoid_family(labels: &[f64], alpha: f64, beta: f64) -> Vec<Curve> {
    let x = log_grid(0.0, 8.0, 120);
    labels
        .iter()
        .map(|&k| {
            let y = x
                .iter()
                .map(|&v| k.powf(beta) / (1.0 + (-(v / k.powf(alpha)).ln() * 2.0).exp()))
                .collect();
            Curve::new(x.clone(), y, k).unwrap()
        })
        .collect()
}

fn single_line_mse(c: &Curve) -> f64 {
    let u: Vec<f64> = c.x().iter().map(|v| v.log10()).collect();
    let (a, b) = crate::numeric::line_fit(&u, c.y()).unwrap();
    u.iter()
        .zip(c.y())
        .map(|(x, y)| (a + b * x - y).powi(2))
        .sum::<f64>()
        / u.len() as f64
}

#[test]
fn exact_knee_is_recovered_exactly() {
    let x = log_grid(1.0, 5.0, 41);
    let y = knee(&x, 3.0, 0.2, 0.0, 0);
    let fit = bilinear_fit(&Curve::new(x, y, 1.0).unwrap()).unwrap();
    assert!(
        (fit.breakpoint / 1e3 - 1.0).abs() < 1e-9,
        "{}",
        fit.breakpoint
    );
    assert!(fit.mse < 1e-20);
    assert!(fit.left_slope.abs() < 1e-9 && (fit.right_slope - 0.2).abs() < 1e-9);
    // A knot between grid points is found by the refinement.
    let x = log_grid(1.0, 5.0, 40);
    let y = knee(&x, 3.0, 0.2, 0.0, 0);
    let fit = bilinear_fit(&Curve::new(x, y, 1.0).unwrap()).unwrap();
    assert!(
        (fit.breakpoint.log10() - 3.0).abs() < 1e-6,
        "{}",
        fit.breakpoint
    );
}

#[test]
fn noisy_knee_within_five_percent() {
    let x = log_grid(1.0, 5.0, 1000);
    for seed in 0..20 {
        let y = knee(&x, 3.0, 0.2, 0.01, seed);
        let fit = bilinear_fit(&Curve::new(x.clone(), y, 1.0).unwrap()).unwrap();
        assert!(
            (fit.breakpoint / 1e3 - 1.0).abs() < 0.05,
            "seed {seed}: {}",
            fit.breakpoint
        );
        assert!(fit.breakpoint > x[0] && fit.breakpoint < x[x.len() - 1]);
    }
}

#[test]
fn bilinear_errors() {
    let x = log_grid(0.0, 3.0, 10);
    assert_eq!(
        bilinear_fit(&Curve::new(x.clone(), vec![0.3; 10], 1.0).unwrap()),
        Err(AnalysisError::DegenerateCurve)
    );
    let short = Curve::new(
        x[..7].to_vec(),
        vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        1.0,
    )
    .unwrap();
    assert_eq!(
        bilinear_fit(&short),
        Err(AnalysisError::TooFewPoints { need: 8, got: 7 })
    );
    assert!(Curve::new(vec![1.0, 1.0], vec![0.0, 0.0], 1.0).is_err());
    assert!(Curve::new(vec![0.0, 1.0], vec![0.0, 0.0], 1.0).is_err());
    assert!(Curve::new(vec![1.0], vec![], 1.0).is_err());
}

#[test]
fn power_laws() {
    let pts: Vec<(f64, f64)> = [1.0, 3.0, 10.0, 30.0, 100.0]
        .iter()
        .map(|&x| (x, 2.0 * f64::powf(x, 1.5)))
        .collect();
    let fit = powerlaw_fit(&pts).unwrap();
    assert!(
        (fit.exponent - 1.5).abs() < 1e-12
            && (fit.prefactor - 2.0).abs() < 1e-10
            && fit.residual < 1e-9
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let ks = [14800.0, 18000.0, 21200.0, 27600.0, 32400.0, 38800.0];
    for _ in 0..50 {
        let pts: Vec<(f64, f64)> = ks
            .iter()
            .map(|&k| (k, 3.0 * f64::powf(k, 0.5) * (1.0 + noise.sample(&mut rng))))
            .collect();
        let fit = powerlaw_fit(&pts).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.25, "{}", fit.exponent);
    }
    assert_eq!(
        powerlaw_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
        Err(AnalysisError::NonPositivePoint(2.0, 0.0))
    );
    assert!(matches!(
        powerlaw_fit(&[(1.0, 1.0), (2.0, 2.0)]),
        Err(AnalysisError::TooFewPoints { .. })
    ));
}

#[test]
fn collapse_recovers_generating_exponents() {
    let labels = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];
    let grid = exponent_grid(0.0, 2.5, 0.1).unwrap();
    for alpha in [0.5, 1.5] {
        let r = collapse_scan(&sigmoid_family(&labels, alpha, 0.0), &grid, None).unwrap();
        assert!((r.alpha - alpha).abs() < 0.1 + 1e-9, "{alpha}: {}", r.alpha);
        assert!(r.score < 1e-3);
        assert_eq!(r.scores.len(), grid.len());
    }
    let betas = exponent_grid(0.0, 1.0, 0.25).unwrap();
    let r = collapse_scan(
        &sigmoid_family(&labels, 1.5, 0.5),
        &exponent_grid(0.0, 2.5, 0.25).unwrap(),
        Some(&betas),
    )
    .unwrap();
    assert_eq!((r.alpha, r.beta), (1.5, 0.5));
}

#[test]
fn identical_curves_collapse_at_zero() {
    let x = log_grid(0.0, 4.0, 30);
    let y: Vec<f64> = x.iter().map(|v| (v.log10() / 4.0).powi(2)).collect();
    let curves: Vec<Curve> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&k| Curve::new(x.clone(), y.clone(), k).unwrap())
        .collect();
    let r = collapse_scan(&curves, &exponent_grid(0.0, 2.5, 0.25).unwrap(), None).unwrap();
    assert_eq!(r.alpha, 0.0);
    assert!(r.score < 1e-20);
}

#[test]
fn collapse_errors() {
    let x = log_grid(0.0, 1.0, 5);
    let a = Curve::new(x.clone(), vec![0.0, 0.1, 0.2, 0.3, 0.4], 10.0).unwrap();
    let b = Curve::new(x.clone(), vec![0.0, 0.1, 0.2, 0.3, 0.4], 1e6).unwrap();
    assert!(matches!(
        collapse_scan(std::slice::from_ref(&a), &[0.0], None),
        Err(AnalysisError::TooFewPoints { .. })
    ));
    assert!(matches!(
        collapse_scan(&[a.clone(), a.clone()], &[0.0], None),
        Err(AnalysisError::InvalidCurve(_))
    ));
    assert_eq!(
        collapse_scan(&[a.clone(), b.clone()], &[1.0, 2.0], None),
        Err(AnalysisError::NoOverlap)
    );
    let r = collapse_scan(&[a, b], &[0.0, 1.0], None).unwrap();
    assert_eq!(r.scores[1].score, None);
    assert!(exponent_grid(1.0, 0.0, 0.1).is_err());
    assert_eq!(exponent_grid(0.0, 2.5, 0.25).unwrap().len(), 11);
}

#[test]
fn curves_from_metric_tables() {
    let table = |label: &str, scale: f64| {
        let reports = (0..5u64)
            .map(|i| {
                let mut r = MetricReport::new(i * 100);
                r.push_mean("free/type_check_descriptive", &[i as f64 / scale]);
                r
            })
            .collect();
        MetricTable {
            label: Some(label.into()),
            reports,
        }
    };
    let curves = curves_from_tables(
        &[table("1000", 4.0), table("2000", 8.0)],
        "free/type_check_descriptive",
    )
    .unwrap();
    assert_eq!(curves[1].label(), 2000.0);
    assert_eq!(curves[0].x(), &[100.0, 200.0, 300.0, 400.0]);
    assert_eq!(curves[1].y()[3], 0.5);
    assert!(curves_from_tables(&[table("big", 1.0)], "free/type_check_descriptive").is_err());
    assert!(curves_from_tables(&[table("1", 1.0)], "missing").is_err());
}

proptest! {
    #[test]
    fn bilinear_never_worse_than_a_line(ys in proptest::collection::vec(-1.0f64..1.0, 8..30)) {
        let x = log_grid(0.0, 4.0, ys.len());
        let c = Curve::new(x, ys, 1.0).unwrap();
        if let Ok(fit) = bilinear_fit(&c) {
            prop_assert!(fit.mse <= single_line_mse(&c) + 1e-12);
            prop_assert!(fit.mse >= 0.0);
        }
    }

    #[test]
    fn collapse_score_ignores_order_and_joint_x_scale(shift in -3.0f64..3.0, rot in 0usize..6) {
        let labels = [100.0, 200.0, 400.0, 800.0, 1600.0, 3200.0];
        let mut curves = sigmoid_family(&labels, 1.0, 0.0);
        let grid = [0.0, 0.5, 0.8, 1.0, 1.3];
        let base = collapse_scan(&curves, &grid, None).unwrap();
        curves.rotate_left(rot);
        let f = 10f64.powf(shift);
        let moved: Vec<Curve> = curves
            .iter()
            .map(|c| Curve::new(c.x().iter().map(|x| x * f).collect(), c.y().to_vec(), c.label()).unwrap())
            .collect();
        let other = collapse_scan(&moved, &grid, None).unwrap();
        prop_assert_eq!(base.alpha, other.alpha);
        for (a, b) in base.scores.iter().zip(&other.scores) {
            prop_assert!((a.score.unwrap() - b.score.unwrap()).abs() < 1e-9);
        }
    }
}
