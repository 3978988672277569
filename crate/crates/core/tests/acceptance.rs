//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs under `cargo test` as a harness-less test target.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use emergence_core::analysis::{bilinear_fit, collapse_scan, exponent_grid, powerlaw_fit, Curve};
use emergence_core::bridge::predict_for_params;
use emergence_core::corpus::{perturb, sample_sentence, Perturbation, Vocabulary};
use emergence_core::eval::memorization_ceiling;
use emergence_core::grammar::{
    default_grammar, derivation_nll, recognize, sample_symbolic, GrammarSpec, Role, Symbol,
};
use emergence_core::percolation::{
    concept_components, estimate_critical, heavy_tail_beta, mean_cluster_size_analytic, propagate,
    propagation_support, reachable_within, simulate_percolation, susceptibility_peak,
    threshold_analytic, threshold_complete, Base, BetaWindow, ConceptDensityMatrix,
    DegreeDistribution,
};
use emergence_core::rng::item_rng;
use emergence_core::typegraph::{build_typegraph, Level, TypeGraphParams};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Leftmost-derivation enumeration of every string up to `max_len` roles with
/// its summed derivation probability.
fn enumerate(grammar: &GrammarSpec, max_len: usize) -> HashMap<Vec<Role>, f64> {
    let mut out = HashMap::new();
    let mut stack = vec![(vec![Symbol::Nonterminal(grammar.start())], 1.0)];
    while let Some((form, p)) = stack.pop() {
        if form.len() > max_len {
            continue;
        }
        match form
            .iter()
            .position(|s| matches!(s, Symbol::Nonterminal(_)))
        {
            None => {
                let roles: Vec<Role> = form
                    .iter()
                    .map(|s| match s {
                        Symbol::Role(r) => *r,
                        Symbol::Nonterminal(_) => unreachable!(),
                    })
                    .collect();
                *out.entry(roles).or_insert(0.0) += p;
            }
            Some(pos) => {
                let Symbol::Nonterminal(nt) = form[pos] else {
                    unreachable!()
                };
                for prod in grammar.productions(nt) {
                    let mut next = form[..pos].to_vec();
                    next.extend_from_slice(&prod.rhs);
                    next.extend_from_slice(&form[pos + 1..]);
                    stack.push((next, p * prod.probability));
                }
            }
        }
    }
    out
}

fn grammar_round_trip() -> Outcome {
    let g = default_grammar();
    let start = Instant::now();
    let failures = (0..10_000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = item_rng(1, 100, i);
            let s = sample_symbolic(&g, &mut rng).expect("sampler");
            recognize(&g, &s.roles).is_none_or(|t| t.leaves() != s.roles)
        })
        .count();
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < Duration::from_secs(60),
        format!("{failures} of 10000 sampled sentences rejected in {elapsed:.2?} (limit 60s)"),
    )
}

fn brute_force_equivalence() -> Outcome {
    let g = default_grammar();
    let oracle = enumerate(&g, 4);
    let mut mismatched = 0;
    let mut strings = vec![Vec::new()];
    let mut checked = 0;
    for _ in 0..4 {
        strings = strings
            .into_iter()
            .flat_map(|s: Vec<Role>| {
                Role::BODY.iter().map(move |&r| {
                    let mut t = s.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
        for s in &strings {
            checked += 1;
            let member = recognize(&g, s).is_some();
            if member != oracle.contains_key(s) {
                mismatched += 1;
            }
            if let Some(&p) = oracle.get(s) {
                let inside = (-derivation_nll(&g, s).unwrap_or(f64::INFINITY)).exp();
                if (inside - p).abs() > 1e-12 * p {
                    mismatched += 1;
                }
            }
        }
    }

    let n = 1_000_000u64;
    let counts = (0..n)
        .into_par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Vec<Role>, u64>, i| {
            let mut rng = item_rng(2, 100, i);
            let s = sample_symbolic(&g, &mut rng).expect("sampler");
            if s.roles.len() <= 4 {
                *acc.entry(s.roles).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for (s, &p) in &oracle {
        let observed = counts.get(s).copied().unwrap_or(0) as f64;
        let expected = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        let z = (observed - expected).abs() / sd;
        worst = worst.max(z);
        if z > 3.0 {
            outside += 1;
        }
    }
    let stray = counts.keys().filter(|s| !oracle.contains_key(*s)).count();
    outcome(
        mismatched == 0 && outside == 0 && stray == 0,
        format!(
            "{checked} strings checked, {mismatched} membership/probability mismatches; {} short strings over 1e6 draws, worst |z| = {worst:.2}, {outside} beyond 3σ",
            oracle.len()
        ),
    )
}

fn type_oracle() -> Outcome {
    let params = TypeGraphParams::default();
    let graph = build_typegraph(&params).expect("graph");
    let grammar = default_grammar();
    let vocab = Vocabulary::new(&params);
    let n = 10_000u64;
    let (valid, values_caught, grammar_caught) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(3, 100, i);
            let s =
                sample_sentence(&grammar, &graph, &vocab, Level::Seen, &mut rng).expect("populate");
            let ok = s.type_check(&graph, &vocab).is_some_and(|c| c.all);
            let rv = perturb(
                &s,
                Perturbation::RandomizeValues,
                &graph,
                &grammar,
                &vocab,
                &mut rng,
            )
            .expect("perturb");
            let rv_caught = !rv.type_check(&graph, &vocab).is_some_and(|c| c.all);
            let rg = perturb(
                &s,
                Perturbation::RandomizeGrammar,
                &graph,
                &grammar,
                &vocab,
                &mut rng,
            )
            .expect("perturb");
            let rg_caught = recognize(&grammar, &rg.roles).is_none();
            (ok as u64, rv_caught as u64, rg_caught as u64)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    outcome(
        valid == n && values_caught == n && grammar_caught == n,
        format!(
            "{valid}/{n} populated pass, {values_caught}/{n} value perturbations fail, {grammar_caught}/{n} grammar perturbations fail to parse"
        ),
    )
}

fn propagation_reachability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut disagreements = 0;
    for _ in 0..200 {
        let (r, c) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let density = rng.random_range(0.05..0.5);
        let dense: Vec<Vec<f64>> = (0..r)
            .map(|_| {
                (0..c)
                    .map(|_| if rng.random_bool(density) { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let d = ConceptDensityMatrix::from_dense(&dense).unwrap();
        for n in 0..=6 {
            if propagation_support(&d, n) != reachable_within(&d, n) {
                disagreements += 1;
            }
        }
    }
    let d = ConceptDensityMatrix::from_dense(&[
        vec![1.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ])
    .unwrap();
    let t1 = propagate(&d, 1);
    let example = t1
        == vec![
            vec![3.0, 2.0, 0.0],
            vec![2.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
    let groups = concept_components(&d).groups();
    let components = groups == vec![(vec![0, 1], vec![0, 1]), (vec![2], vec![2])];
    outcome(
        disagreements == 0 && example && components,
        format!(
            "{disagreements} disagreements over 200 matrices × n ≤ 6; T(1) example {}; components {{Man,Lawyer,Walk,Stoic}} | {{Telephone,Ring}} {}",
            if example { "matches" } else { "differs" },
            if components { "match" } else { "differ" }
        ),
    )
}

fn log_grid(center: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| center * lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn percolation_threshold() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (nl, nr, target) in [(300, 300, 1.0 / 299.0), (900, 18000, 2.486e-4)] {
        let curve = simulate_percolation(
            &Base::Complete {
                n_left: nl,
                n_right: nr,
            },
            &log_grid(target, 0.3, 3.0, 41),
            20,
            5,
        )
        .expect("simulation");
        match susceptibility_peak(&curve) {
            Ok(p) => {
                let rel = p / target - 1.0;
                pass &= rel.abs() <= 0.25;
                details.push(format!(
                    "{nl}×{nr}: peak {p:.4e} vs {target:.4e} ({:+.1}%)",
                    100.0 * rel
                ));
            }
            Err(e) => {
                pass = false;
                details.push(format!("{nl}×{nr}: {e}"));
            }
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    outcome(
        pass,
        format!("{}; 20 trials in {elapsed:.2?}", details.join("; ")),
    )
}

fn mean_cluster_size() -> Outcome {
    let pois = DegreeDistribution::poisson(3.0).unwrap();
    let p_c = threshold_analytic(&pois, &pois).unwrap();
    let p = 0.5 * p_c;
    let analytic = mean_cluster_size_analytic(&pois, &pois, p).unwrap();
    let base = Base::Configuration {
        n_left: 5000,
        n_right: 5000,
        left: pois.clone(),
        right: pois,
    };
    let simulated = simulate_percolation(&base, &[p], 20, 6).unwrap().points[0].mean_cluster_left;
    let rel = simulated / analytic - 1.0;
    outcome(
        rel.abs() <= 0.10 && (analytic - 4.0 / 3.0).abs() < 1e-12,
        format!(
            "analytic {analytic:.4}, simulated {simulated:.4} ({:+.1}%)",
            100.0 * rel
        ),
    )
}

fn critical_exponent() -> Outcome {
    let curves: Vec<_> = [250, 500, 1000, 2000]
        .iter()
        .map(|&n| {
            let p_c = threshold_complete(n, n).unwrap();
            simulate_percolation(
                &Base::Complete {
                    n_left: n,
                    n_right: n,
                },
                &log_grid(p_c, 0.7, 2.0, 61),
                400,
                7,
            )
            .unwrap()
        })
        .collect();
    let est = estimate_critical(&curves, BetaWindow::default());
    let heavy = heavy_tail_beta(3.5).unwrap();
    match est {
        Ok(e) => {
            let beta = e.beta.unwrap_or(f64::NAN);
            let p_c = threshold_complete(2000, 2000).unwrap();
            outcome(
                (beta - 1.0).abs() <= 0.3 && heavy == 2.0,
                format!(
                    "β̂ = {beta:.3} on 2000×2000 (threshold extrapolated from 250–2000 per side: {:.4} × analytic); heavy_tail_beta(3.5) = {heavy}",
                    e.p_c / p_c
                ),
            )
        }
        Err(e) => outcome(false, format!("estimate failed: {e}")),
    }
}

fn memorization() -> Outcome {
    let v = memorization_ceiling(128.0, 1e4, 10.0, 900.0, 18000.0, 4.0, 0.15);
    outcome(
        (v - 0.149).abs() <= 0.001,
        format!("ceiling {v:.5} (target 0.149 ± 0.001)"),
    )
}

fn fitting() -> Outcome {
    // Bilinear: flat, then 0.2 per decade after 10^3, σ = 0.01, 1000 log-spaced points.
    let x: Vec<f64> = (0..1000)
        .map(|i| 10f64.powf(1.0 + 4.0 * i as f64 / 999.0))
        .collect();
    let mut errors: Vec<f64> = (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 0.01).unwrap();
            let y = x
                .iter()
                .map(|v| 0.2 * (v.log10() - 3.0).max(0.0) + noise.sample(&mut rng))
                .collect();
            let fit = bilinear_fit(&Curve::new(x.clone(), y, 1.0).unwrap()).unwrap();
            (fit.breakpoint / 1e3 - 1.0).abs()
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    let bilinear_p95 = errors[94];

    // Power law: 20 log-spaced scales over three decades, 5% multiplicative noise.
    let scales: Vec<f64> = (0..20)
        .map(|i| 10f64.powf(1.0 + 3.0 * i as f64 / 19.0))
        .collect();
    let mut worst_exponent: f64 = 0.0;
    for exponent in [0.5, 1.5] {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let noise = Normal::new(0.0, 0.05).unwrap();
            let pts: Vec<(f64, f64)> = scales
                .iter()
                .map(|&k| (k, 2.0 * k.powf(exponent) * (1.0 + noise.sample(&mut rng))))
                .collect();
            worst_exponent =
                worst_exponent.max((powerlaw_fit(&pts).unwrap().exponent - exponent).abs());
        }
    }

    // Collapse: y = g(x / K^alpha) for six K.
    let labels: [f64; 6] = [1000.0, 2000.0, 4000.0, 8000.0, 16000.0, 32000.0];
    let grid = exponent_grid(0.0, 2.5, 0.1).unwrap();
    let xs: Vec<f64> = (0..200)
        .map(|i| 10f64.powf(8.0 * i as f64 / 199.0))
        .collect();
    let mut recovered = Vec::new();
    for alpha in [0.5, 1.5] {
        let curves: Vec<Curve> = labels
            .iter()
            .map(|&k| {
                let y = xs
                    .iter()
                    .map(|&v| 1.0 / (1.0 + (v / k.powf(alpha)).powf(-1.5)))
                    .collect();
                Curve::new(xs.clone(), y, k).unwrap()
            })
            .collect();
        recovered.push(collapse_scan(&curves, &grid, None).unwrap().alpha);
    }
    let collapse_ok =
        (recovered[0] - 0.5).abs() <= 0.1 + 1e-9 && (recovered[1] - 1.5).abs() <= 0.1 + 1e-9;
    outcome(
        bilinear_p95 <= 0.05 && worst_exponent <= 0.05 && collapse_ok,
        format!(
            "bilinear breakpoint error p95 {:.2}% (100 seeds); power-law worst exponent error {worst_exponent:.4} (200 fits); collapse recovered {:.2} and {:.2}",
            100.0 * bilinear_p95,
            recovered[0],
            recovered[1]
        ),
    )
}

fn predicted_transition_scaling() -> Outcome {
    let grammar = default_grammar();
    let ks = [14800usize, 18000, 21200, 27600, 32400, 38800];
    let mut ratios = Vec::new();
    for &k in &ks {
        let params = TypeGraphParams {
            n_desc_props: k,
            ..TypeGraphParams::default()
        };
        match predict_for_params(&params, &grammar, 128, 100, 11) {
            Ok(p) => ratios.push(p.t_star / (k as f64).sqrt()),
            Err(e) => return outcome(false, format!("K = {k}: {e}")),
        }
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let worst = ratios
        .iter()
        .map(|r| (r / mean - 1.0).abs())
        .fold(0.0, f64::max);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        worst <= 0.15,
        format!(
            "t*/√K = [{}], max deviation from mean {:.1}%",
            shown.join(", "),
            100.0 * worst
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("grammar round-trip", grammar_round_trip),
        ("brute-force equivalence", brute_force_equivalence),
        ("type oracle", type_oracle),
        ("propagation = reachability", propagation_reachability),
        ("percolation threshold", percolation_threshold),
        ("mean cluster size", mean_cluster_size),
        ("critical exponent", critical_exponent),
        ("memorization ceiling", memorization),
        ("fitting", fitting),
        ("predicted-transition scaling", predicted_transition_scaling),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1?}]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
