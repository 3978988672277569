use std::io::{self, Write};

use rayon::prelude::*;

use super::{AnalysisError, Curve};
use crate::SCHEMA_VERSION;

/// Points of the common rescaled-x grid.
pub const COLLAPSE_GRID_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseScore {
    pub alpha: f64,
    pub beta: f64,
    /// `None` where the rescaled curves do not overlap.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseResult {
    pub alpha: f64,
    pub beta: f64,
    pub score: f64,
    /// Every grid point, `alpha` major.
    pub scores: Vec<CollapseScore>,
}

impl CollapseResult {
    /// `alpha,beta,score` rows; non-overlapping grid points have an empty score.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# schema=collapse_scores version={SCHEMA_VERSION} best_alpha={} best_beta={}",
            self.alpha, self.beta
        )?;
        writeln!(w, "alpha,beta,score")?;
        for s in &self.scores {
            match s.score {
                Some(v) => writeln!(w, "{},{},{v}", s.alpha, s.beta)?,
                None => writeln!(w, "{},{},", s.alpha, s.beta)?,
            }
        }
        Ok(())
    }
}

/// `a, a+step, …` up to `b` inclusive (within a small tolerance).
pub fn exponent_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>, AnalysisError> {
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(AnalysisError::InvalidGrid(format!("{a}:{b}:{step}")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(AnalysisError::InvalidGrid("too many grid points".into()));
    }
    Ok((0..=n).map(|i| a + i as f64 * step).collect())
}

/// Curves with `x → x / label^alpha` and `y → y / label^beta`.
pub fn rescale(curves: &[Curve], alpha: f64, beta: f64) -> Vec<Curve> {
    curves
        .iter()
        .map(|c| {
            let (sx, sy) = (c.label().powf(alpha), c.label().powf(beta));
            Curve {
                x: c.x().iter().map(|x| x / sx).collect(),
                y: c.y().iter().map(|y| y / sy).collect(),
                label: c.label(),
            }
        })
        .collect()
}

/// Linear interpolation of `y` at `t`, in `ln x`. `t` must lie in range.
fn interpolate(lx: &[f64], y: &[f64], t: f64) -> f64 {
    let i = lx.partition_point(|&v| v < t);
    if i == 0 {
        return y[0];
    }
    if i == lx.len() {
        return y[y.len() - 1];
    }
    let w = (t - lx[i - 1]) / (lx[i] - lx[i - 1]);
    y[i - 1] + w * (y[i] - y[i - 1])
}

/// Mean cross-curve variance on a log-spaced grid over the overlap of the
/// rescaled curves, divided by the variance of all interpolated values.
fn score(curves: &[Curve], alpha: f64, beta: f64) -> Option<f64> {
    let scaled = rescale(curves, alpha, beta);
    let logs: Vec<Vec<f64>> = scaled
        .iter()
        .map(|c| c.x().iter().map(|x| x.ln()).collect())
        .collect();
    let lo = logs.iter().map(|l| l[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = logs
        .iter()
        .map(|l| l[l.len() - 1])
        .fold(f64::INFINITY, f64::min);
    if lo >= hi {
        return None;
    }
    let m = COLLAPSE_GRID_POINTS;
    let k = curves.len() as f64;
    let mut within = 0.0;
    let mut all = Vec::with_capacity(m * curves.len());
    for g in 0..m {
        let t = lo + (hi - lo) * g as f64 / (m - 1) as f64;
        let vals: Vec<f64> = scaled
            .iter()
            .zip(&logs)
            .map(|(c, l)| interpolate(l, c.y(), t))
            .collect();
        let mean = vals.iter().sum::<f64>() / k;
        within += vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        all.extend(vals);
    }
    within /= m as f64;
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let total = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / all.len() as f64;
    Some(if total > 0.0 { within / total } else { 0.0 })
}

/// Grid search for the exponents that best collapse `curves`.
///
/// Each `(alpha, beta)` rescales `x → x / label^alpha`,
/// `y → y / label^beta` and is scored by the mean variance across curves on
/// a common log-spaced grid over the overlap of the rescaled x ranges,
/// normalised by the overall variance so that different `beta` compare
/// fairly. Lower is better; ties go to the earlier grid point. `beta_grid`
/// defaults to `[0]`.
pub fn collapse_scan(
    curves: &[Curve],
    alpha_grid: &[f64],
    beta_grid: Option<&[f64]>,
) -> Result<CollapseResult, AnalysisError> {
    if curves.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            need: 2,
            got: curves.len(),
        });
    }
    if let Some(c) = curves.iter().find(|c| c.len() < 2) {
        return Err(AnalysisError::InvalidCurve(format!(
            "curve {} has fewer than two points",
            c.label()
        )));
    }
    if curves.iter().any(|c| c.label() <= 0.0) {
        return Err(AnalysisError::InvalidCurve(
            "labels must be positive".into(),
        ));
    }
    let mut labels: Vec<f64> = curves.iter().map(Curve::label).collect();
    labels.sort_by(f64::total_cmp);
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(AnalysisError::InvalidCurve(
            "labels must be distinct".into(),
        ));
    }
    let betas = beta_grid.unwrap_or(&[0.0]);
    if alpha_grid.is_empty() || betas.is_empty() {
        return Err(AnalysisError::InvalidGrid("empty exponent grid".into()));
    }
    let pairs: Vec<(f64, f64)> = alpha_grid
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    let scores: Vec<CollapseScore> = pairs
        .par_iter()
        .map(|&(alpha, beta)| CollapseScore {
            alpha,
            beta,
            score: score(curves, alpha, beta),
        })
        .collect();
    let best = scores
        .iter()
        .filter_map(|s| s.score.map(|v| (s, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(AnalysisError::NoOverlap)?;
    Ok(CollapseResult {
        alpha: best.0.alpha,
        beta: best.0.beta,
        score: best.1,
        scores,
    })
}

/// Long-format `label,x,y` rows for plotting.
pub fn write_long_csv<W: Write>(mut w: W, curves: &[Curve]) -> io::Result<()> {
    writeln!(w, "label,x,y")?;
    for c in curves {
        for (x, y) in c.x().iter().zip(c.y()) {
            writeln!(w, "{},{x},{y}", c.label())?;
        }
    }
    Ok(())
}
