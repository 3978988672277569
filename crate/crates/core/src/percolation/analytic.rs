use super::{DegreeDistribution, PercolationError};

/// Bond-percolation threshold of an uncorrelated bipartite graph,
/// `√(⟨k⟩₁⟨k⟩₂ / (⟨k(k−1)⟩₁⟨k(k−1)⟩₂))`.
pub fn threshold_analytic(
    left: &DegreeDistribution,
    right: &DegreeDistribution,
) -> Result<f64, PercolationError> {
    let (f1, f2) = (left.factorial_moment2(), right.factorial_moment2());
    if f1 <= 0.0 || f2 <= 0.0 {
        return Err(PercolationError::DegenerateDistribution);
    }
    Ok((left.mean() * right.mean() / (f1 * f2)).sqrt())
}

/// Threshold of the complete bipartite graph, `√(1 / ((n₁−1)(n₂−1)))`.
pub fn threshold_complete(n_left: usize, n_right: usize) -> Result<f64, PercolationError> {
    if n_left < 2 || n_right < 2 {
        return Err(PercolationError::DegenerateDistribution);
    }
    Ok((1.0 / ((n_left - 1) as f64 * (n_right - 1) as f64)).sqrt())
}

/// Mean number of left nodes in the cluster of a random left node when every
/// edge is kept with probability `p` below the threshold.
///
/// With the diluted generating functions the first generation holds
/// `p⟨k⟩₁ · p⟨k(k−1)⟩₂/⟨k⟩₂` left nodes and each later one multiplies by
/// `p²⟨k(k−1)⟩₁⟨k(k−1)⟩₂ / (⟨k⟩₁⟨k⟩₂)`.
pub fn mean_cluster_size_analytic(
    left: &DegreeDistribution,
    right: &DegreeDistribution,
    p: f64,
) -> Result<f64, PercolationError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PercolationError::OutOfRange {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    let p_c = threshold_analytic(left, right)?;
    if p >= p_c {
        return Err(PercolationError::Supercritical { p, p_c });
    }
    let (k1, k2) = (left.mean(), right.mean());
    let (f1, f2) = (left.factorial_moment2(), right.factorial_moment2());
    let first = p * k1 * p * f2 / k2;
    let branching = p * p * f1 * f2 / (k1 * k2);
    Ok(1.0 + first / (1.0 - branching))
}

/// Order-parameter exponent for degree tails `P(k) ∼ k^−γ`, `1/(γ−3)`, valid
/// for `3 < γ < 4`.
pub fn heavy_tail_beta(gamma: f64) -> Result<f64, PercolationError> {
    if !(gamma > 3.0 && gamma < 4.0) {
        return Err(PercolationError::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "(3, 4)",
        });
    }
    Ok(1.0 / (gamma - 3.0))
}

/// Approximate number of entity-property pairs joined by paths of at most
/// `2n + 1` steps, `n_left · ⟨k⟩₁ⁿ⁺¹ · ⟨k⟩₂ⁿ`.
pub fn finite_steps_count(n_left: f64, k1_mean: f64, k2_mean: f64, n: u32) -> f64 {
    n_left * k1_mean.powi(n as i32 + 1) * k2_mean.powi(n as i32)
}
