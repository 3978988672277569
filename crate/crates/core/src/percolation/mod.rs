//! Concept density and propagation matrices, bond percolation on bipartite
//! graphs and the generating-function theory of its threshold.

mod analytic;
mod graph;
mod matrix;
mod simulate;

use thiserror::Error;

pub use analytic::{
    finite_steps_count, heavy_tail_beta, mean_cluster_size_analytic, threshold_analytic,
    threshold_complete,
};
pub use graph::{BipartiteGraph, DegreeDistribution, UnionFind};
pub use matrix::{
    concept_components, propagate, propagate_counts, propagation_support, reachable_within,
    Components, ConceptDensityMatrix,
};
pub use simulate::{
    estimate_critical, simulate_percolation, susceptibility_peak, Base, BetaWindow,
    CriticalEstimate, CurvePoint, PercolationCurve,
};

#[derive(Debug, Error)]
pub enum PercolationError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("degenerate distribution: second factorial moment is zero")]
    DegenerateDistribution,
    #[error("p = {p} is not below the threshold {p_c}")]
    Supercritical { p: f64, p_c: f64 },
    #[error("invalid probability grid: {0}")]
    InvalidGrid(String),
    #[error("no transition detected: {0}")]
    NoTransition(String),
    #[error("{name} = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
