use super::{AnalysisError, Curve};
use crate::numeric::{golden_section, least_squares, line_fit};

/// Continuous two-segment fit in `(log₁₀ x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearFit {
    /// Knot position in iterations (not log).
    pub breakpoint: f64,
    /// Fitted `y` at the knot.
    pub level: f64,
    /// Slopes per decade of `x`.
    pub left_slope: f64,
    pub right_slope: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Residual sum of squares in log space.
    pub residual: f64,
}

const MIN_BILINEAR_POINTS: usize = 8;

/// Hinge regression at a fixed knot `k`: `y ≈ a + b₁·min(u−k, 0) + b₂·max(u−k, 0)`.
fn hinge(u: &[f64], y: &[f64], k: f64) -> Option<([f64; 3], f64)> {
    let rows: Vec<[f64; 3]> = u
        .iter()
        .map(|&ui| [1.0, (ui - k).min(0.0), (ui - k).max(0.0)])
        .collect();
    let c = least_squares(&rows, y)?;
    let sse: f64 = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| (c[0] + c[1] * r[1] + c[2] * r[2] - yi).powi(2))
        .sum();
    Some((c, sse / y.len() as f64))
}

/// Least-squares continuous bilinear spline in `(log₁₀ x, y)`.
///
/// Every interior data point is tried as the knot; the best one is refined
/// by golden-section search between its neighbours.
pub fn bilinear_fit(curve: &Curve) -> Result<BilinearFit, AnalysisError> {
    let n = curve.len();
    if n < MIN_BILINEAR_POINTS {
        return Err(AnalysisError::TooFewPoints {
            need: MIN_BILINEAR_POINTS,
            got: n,
        });
    }
    let y = curve.y();
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if hi - lo <= 1e-12 {
        return Err(AnalysisError::DegenerateCurve);
    }
    let u: Vec<f64> = curve.x().iter().map(|x| x.log10()).collect();
    let mse = |k: f64| hinge(&u, y, k).map_or(f64::INFINITY, |(_, m)| m);
    let best = (1..n - 1)
        .min_by(|&a, &b| mse(u[a]).total_cmp(&mse(u[b])))
        .expect("n >= 8");
    let refined = golden_section(u[best - 1], u[best + 1], 1e-12 * (1.0 + u[best].abs()), mse);
    let knot = if mse(refined) < mse(u[best]) {
        refined
    } else {
        u[best]
    };
    let (c, m) = hinge(&u, y, knot).ok_or(AnalysisError::DegenerateCurve)?;
    Ok(BilinearFit {
        breakpoint: 10f64.powf(knot),
        level: c[0],
        left_slope: c[1],
        right_slope: c[2],
        mse: m,
    })
}

/// `y ≈ prefactor · x^exponent` by least squares on `(ln x, ln y)`.
pub fn powerlaw_fit(points: &[(f64, f64)]) -> Result<PowerLawFit, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            need: 3,
            got: points.len(),
        });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(AnalysisError::NonPositivePoint(x, y));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (a, b) = line_fit(&lx, &ly)
        .ok_or_else(|| AnalysisError::InvalidCurve("all x values are equal".into()))?;
    let residual = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (a + b * x - y).powi(2))
        .sum();
    Ok(PowerLawFit {
        exponent: b,
        prefactor: a.exp(),
        residual,
    })
}
