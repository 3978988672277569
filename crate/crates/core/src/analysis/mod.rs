//! Transition detection and scaling analysis of metric curves: bilinear
//! breakpoint fits, power laws of breakpoints against scale, and curve
//! collapse under power rescaling of both axes.

mod collapse;
mod fit;

use thiserror::Error;

use crate::eval::MetricTable;

pub use collapse::{
    collapse_scan, exponent_grid, rescale, write_long_csv, CollapseResult, CollapseScore,
    COLLAPSE_GRID_POINTS,
};
pub use fit::{bilinear_fit, powerlaw_fit, BilinearFit, PowerLawFit};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("degenerate curve: y is constant")]
    DegenerateCurve,
    #[error("point ({0}, {1}) is not positive")]
    NonPositivePoint(f64, f64),
    #[error("rescaled curves do not overlap")]
    NoOverlap,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Metric against iterations for one value of a scale variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    label: f64,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, label: f64) -> Result<Self, AnalysisError> {
        if x.len() != y.len() {
            return Err(AnalysisError::InvalidCurve(format!(
                "{} x values but {} y values",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) || !label.is_finite() {
            return Err(AnalysisError::InvalidCurve("values must be finite".into()));
        }
        if x.iter().any(|&v| v <= 0.0) {
            return Err(AnalysisError::InvalidCurve("x must be positive".into()));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AnalysisError::InvalidCurve(
                "x must be strictly increasing".into(),
            ));
        }
        Ok(Self { x, y, label })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn label(&self) -> f64 {
        self.label
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// One curve per table from the `metric` series; the label is the table's
/// label parsed as a number. Iteration 0 is dropped (log axes).
pub fn curves_from_tables(
    tables: &[MetricTable],
    metric: &str,
) -> Result<Vec<Curve>, AnalysisError> {
    tables
        .iter()
        .map(|t| {
            let raw = t
                .label
                .as_deref()
                .ok_or_else(|| AnalysisError::InvalidCurve("table without label".into()))?;
            let label = raw.parse().map_err(|_| {
                AnalysisError::InvalidCurve(format!("label `{raw}` is not a number"))
            })?;
            let (x, y): (Vec<f64>, Vec<f64>) = t
                .series(metric)
                .into_iter()
                .filter(|&(i, _)| i > 0)
                .map(|(i, v)| (i as f64, v))
                .unzip();
            if x.is_empty() {
                return Err(AnalysisError::InvalidCurve(format!(
                    "table `{raw}` has no `{metric}` values"
                )));
            }
            Curve::new(x, y, label)
        })
        .collect()
}

#[cfg(test)]
mod tests;
