use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;

use super::graph::check_consistent;
use super::{
    threshold_analytic, threshold_complete, BipartiteGraph, DegreeDistribution, PercolationError,
    UnionFind,
};
use crate::numeric::{least_squares, line_fit};
use crate::rng::{item_rng, stream};
use crate::SCHEMA_VERSION;

/// Graph whose edges are diluted.
#[derive(Debug, Clone)]
pub enum Base {
    /// Every left node joined to every right node.
    Complete { n_left: usize, n_right: usize },
    /// A fixed graph, e.g. the seen edges of a type graph.
    Graph(BipartiteGraph),
    /// A fresh configuration-model graph per trial.
    Configuration {
        n_left: usize,
        n_right: usize,
        left: DegreeDistribution,
        right: DegreeDistribution,
    },
}

impl Base {
    pub fn n_left(&self) -> usize {
        match self {
            Base::Complete { n_left, .. } | Base::Configuration { n_left, .. } => *n_left,
            Base::Graph(g) => g.n_left(),
        }
    }

    pub fn n_right(&self) -> usize {
        match self {
            Base::Complete { n_right, .. } | Base::Configuration { n_right, .. } => *n_right,
            Base::Graph(g) => g.n_right(),
        }
    }

    /// Generating-function threshold from the base's degree distributions.
    pub fn reference_threshold(&self) -> Option<f64> {
        match self {
            Base::Complete { n_left, n_right } => threshold_complete(*n_left, *n_right).ok(),
            Base::Graph(g) => {
                let left = DegreeDistribution::from_degrees(&g.left_degrees()).ok()?;
                let right = DegreeDistribution::from_degrees(&g.right_degrees()).ok()?;
                threshold_analytic(&left, &right).ok()
            }
            Base::Configuration { left, right, .. } => threshold_analytic(left, right).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub p: f64,
    /// Largest-cluster node fraction, mean and sample standard deviation over
    /// trials.
    pub largest_mean: f64,
    pub largest_std: f64,
    /// Mean finite-cluster size `Σ s² / Σ s` over all clusters but the
    /// largest, in nodes. Peaks at the transition.
    pub susceptibility: f64,
    /// Mean number of left nodes in the cluster of a random left node,
    /// `Σ L² / Σ L` over all clusters.
    pub mean_cluster_left: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercolationCurve {
    pub n_left: usize,
    pub n_right: usize,
    pub trials: usize,
    /// Generating-function threshold of the base, when defined.
    pub reference_threshold: Option<f64>,
    pub points: Vec<CurvePoint>,
}

impl PercolationCurve {
    /// CSV with a `# schema=percolation_curve` comment line and columns
    /// `p,largest_mean,largest_std,susceptibility,mean_cluster_left`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# schema=percolation_curve version={SCHEMA_VERSION} n_left={} n_right={} trials={}{}",
            self.n_left,
            self.n_right,
            self.trials,
            self.reference_threshold
                .map(|p| format!(" reference_threshold={p}"))
                .unwrap_or_default()
        )?;
        writeln!(
            w,
            "p,largest_mean,largest_std,susceptibility,mean_cluster_left"
        )?;
        for pt in &self.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                pt.p, pt.largest_mean, pt.largest_std, pt.susceptibility, pt.mean_cluster_left
            )?;
        }
        Ok(())
    }
}

struct TrialStats {
    largest: f64,
    susceptibility: f64,
    mean_cluster_left: f64,
}

/// Calls `f` on each index in `0..m` kept independently with probability `p`,
/// jumping over geometric gaps.
fn for_each_kept<R: Rng + ?Sized>(m: u64, p: f64, rng: &mut R, mut f: impl FnMut(u64)) {
    if p <= 0.0 || m == 0 {
        return;
    }
    if p >= 1.0 {
        (0..m).for_each(f);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next = 0.0f64;
    loop {
        let u: f64 = rng.random();
        next += ((1.0 - u).ln() / log_q).floor();
        if next >= m as f64 {
            return;
        }
        f(next as u64);
        next += 1.0;
    }
}

fn run_trial<R: Rng + ?Sized>(
    n_left: usize,
    n_right: usize,
    edges: EdgeSource<'_>,
    p: f64,
    rng: &mut R,
) -> TrialStats {
    let n = n_left + n_right;
    let mut uf = UnionFind::new(n);
    match edges {
        EdgeSource::Complete => {
            let nr = n_right as u64;
            for_each_kept(n_left as u64 * nr, p, rng, |i| {
                uf.union((i / nr) as usize, n_left + (i % nr) as usize);
            });
        }
        EdgeSource::List(list) => for_each_kept(list.len() as u64, p, rng, |i| {
            let (l, r) = list[i as usize];
            uf.union(l as usize, n_left + r as usize);
        }),
    }
    let mut size = vec![0u64; n];
    let mut left = vec![0u64; n];
    for i in 0..n {
        let r = uf.find(i);
        size[r] += 1;
        if i < n_left {
            left[r] += 1;
        }
    }
    let largest_root = (0..n)
        .max_by_key(|&r| (size[r], std::cmp::Reverse(r)))
        .expect("nonempty");
    let (mut s1, mut s2, mut l1, mut l2) = (0u64, 0u64, 0u64, 0u64);
    for r in 0..n {
        l1 += left[r];
        l2 += left[r] * left[r];
        if r != largest_root {
            s1 += size[r];
            s2 += size[r] * size[r];
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    TrialStats {
        largest: size[largest_root] as f64 / n as f64,
        susceptibility: ratio(s2, s1),
        mean_cluster_left: ratio(l2, l1),
    }
}

#[derive(Clone, Copy)]
enum EdgeSource<'a> {
    Complete,
    List(&'a [(u32, u32)]),
}

/// Bond percolation on `base` at every `p` in `p_grid`.
///
/// Trial `t` at grid index `i` uses its own RNG derived from `seed`;
/// configuration-model bases draw realisation `t` once and share it across
/// the grid.
pub fn simulate_percolation(
    base: &Base,
    p_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PercolationCurve, PercolationError> {
    if p_grid.is_empty() {
        return Err(PercolationError::InvalidGrid("empty grid".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(PercolationError::InvalidGrid(format!(
            "p = {p} outside [0, 1]"
        )));
    }
    if trials == 0 {
        return Err(PercolationError::InvalidGrid(
            "need at least one trial".into(),
        ));
    }
    let (n_left, n_right) = (base.n_left(), base.n_right());
    if n_left == 0 || n_right == 0 {
        return Err(PercolationError::InvalidGraph(
            "both sides need at least one node".into(),
        ));
    }
    let realisations: Vec<BipartiteGraph> = match base {
        Base::Configuration { left, right, .. } => {
            check_consistent(n_left, n_right, left, right)?;
            (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = item_rng(seed, stream::CONFIGURATION_MODEL, t);
                    BipartiteGraph::configuration(n_left, n_right, left, right, &mut rng)
                })
                .collect::<Result<_, _>>()?
        }
        _ => Vec::new(),
    };
    let source = |t: usize| match base {
        Base::Complete { .. } => EdgeSource::Complete,
        Base::Graph(g) => EdgeSource::List(g.edges()),
        Base::Configuration { .. } => EdgeSource::List(realisations[t].edges()),
    };

    let jobs: Vec<(usize, usize)> = (0..p_grid.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();
    let stats: Vec<TrialStats> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let mut rng = item_rng(seed, stream::PERCOLATION, (i as u64) << 32 | t as u64);
            run_trial(n_left, n_right, source(t), p_grid[i], &mut rng)
        })
        .collect();

    let points = p_grid
        .iter()
        .zip(stats.chunks(trials))
        .map(|(&p, chunk)| {
            let k = chunk.len() as f64;
            let mean = |f: fn(&TrialStats) -> f64| chunk.iter().map(f).sum::<f64>() / k;
            let largest_mean = mean(|s| s.largest);
            let var = if chunk.len() > 1 {
                chunk
                    .iter()
                    .map(|s| (s.largest - largest_mean).powi(2))
                    .sum::<f64>()
                    / (k - 1.0)
            } else {
                0.0
            };
            CurvePoint {
                p,
                largest_mean,
                largest_std: var.sqrt(),
                susceptibility: mean(|s| s.susceptibility),
                mean_cluster_left: mean(|s| s.mean_cluster_left),
            }
        })
        .collect();
    Ok(PercolationCurve {
        n_left,
        n_right,
        trials,
        reference_threshold: base.reference_threshold(),
        points,
    })
}

/// Offsets `(p − p̂_c) / p̂_c` over which the order-parameter exponent is fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for BetaWindow {
    fn default() -> Self {
        Self { lo: 0.1, hi: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalEstimate {
    /// Threshold used for the exponent fit: the susceptibility peak of a
    /// single curve, or the infinite-size extrapolation of several.
    pub p_c: f64,
    /// Susceptibility peak of each input curve.
    pub peaks: Vec<f64>,
    /// Log-log slope of the largest-cluster fraction of the biggest system
    /// against `p − p̂_c`; `None` when fewer than three grid points fall in
    /// the window.
    pub beta: Option<f64>,
}

/// Location of the susceptibility maximum, refined by a least-squares
/// parabola in `ln p` through the peak and up to two neighbours per side.
pub fn susceptibility_peak(curve: &PercolationCurve) -> Result<f64, PercolationError> {
    let pts = &curve.points;
    if pts.windows(2).any(|w| w[0].p >= w[1].p) {
        return Err(PercolationError::InvalidGrid(
            "grid must be strictly increasing".into(),
        ));
    }
    if pts.first().is_some_and(|p| p.p <= 0.0) {
        return Err(PercolationError::InvalidGrid(
            "grid must be positive".into(),
        ));
    }
    let peak = (0..pts.len())
        .max_by(|&a, &b| {
            pts[a]
                .susceptibility
                .total_cmp(&pts[b].susceptibility)
                .then(b.cmp(&a))
        })
        .ok_or_else(|| PercolationError::NoTransition("empty curve".into()))?;
    if peak == 0 || peak + 1 == pts.len() {
        return Err(PercolationError::NoTransition(
            "susceptibility has no interior maximum".into(),
        ));
    }
    let lo = peak.saturating_sub(2);
    let hi = (peak + 2).min(pts.len() - 1);
    let xs: Vec<f64> = (lo..=hi).map(|i| pts[i].p.ln()).collect();
    let ys: Vec<f64> = (lo..=hi).map(|i| pts[i].susceptibility).collect();
    let x1 = pts[peak].p.ln();
    let rows: Vec<[f64; 3]> = xs
        .iter()
        .map(|&x| [(x - x1) * (x - x1), x - x1, 1.0])
        .collect();
    let x_peak = match least_squares(&rows, &ys) {
        Some([a, b, _]) if a < 0.0 => {
            (x1 - b / (2.0 * a)).clamp(pts[peak - 1].p.ln(), pts[peak + 1].p.ln())
        }
        _ => x1,
    };
    Ok(x_peak.exp())
}

/// Threshold and order-parameter exponent `β` of `S ∼ (p − p_c)^β`.
///
/// Finite systems peak above the true threshold, shifted by about
/// `N^(−1/3)` relative to it for `N` nodes on dense bases. Given curves of
/// several sizes, each peak is measured in units of its base's reference
/// threshold, the ratios are extrapolated linearly in `N^(−1/3)` to
/// `N → ∞`, and `p̂_c` is that limit times the reference threshold of the
/// largest system. A single size uses the mean peak. `β` is the
/// least-squares slope of `ln S` against `ln(p − p̂_c)` over the points of the
/// largest system inside `window`.
pub fn estimate_critical(
    curves: &[PercolationCurve],
    window: BetaWindow,
) -> Result<CriticalEstimate, PercolationError> {
    let largest = curves
        .iter()
        .max_by_key(|c| c.n_left + c.n_right)
        .ok_or_else(|| PercolationError::NoTransition("no curves".into()))?;
    let peaks = curves
        .iter()
        .map(susceptibility_peak)
        .collect::<Result<Vec<_>, _>>()?;
    let scale: Vec<f64> = curves
        .iter()
        .map(|c| ((c.n_left + c.n_right) as f64).powf(-1.0 / 3.0))
        .collect();
    let distinct = scale.iter().any(|&s| (s - scale[0]).abs() > 1e-12);
    let p_c = if distinct {
        let refs = curves
            .iter()
            .map(|c| c.reference_threshold)
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                PercolationError::InvalidGraph(
                    "size extrapolation needs reference thresholds".into(),
                )
            })?;
        let ratios: Vec<f64> = peaks.iter().zip(&refs).map(|(p, r)| p / r).collect();
        let b = slope(&scale, &ratios);
        let n = ratios.len() as f64;
        let limit = ratios.iter().sum::<f64>() / n - b * scale.iter().sum::<f64>() / n;
        limit * largest.reference_threshold.expect("checked above")
    } else {
        peaks.iter().sum::<f64>() / peaks.len() as f64
    };
    if p_c <= 0.0 {
        return Err(PercolationError::NoTransition(format!(
            "extrapolated threshold {p_c} is not positive"
        )));
    }

    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for pt in &largest.points {
        let off = (pt.p - p_c) / p_c;
        if off >= window.lo && off <= window.hi && pt.largest_mean > 0.0 {
            lx.push((pt.p - p_c).ln());
            ly.push(pt.largest_mean.ln());
        }
    }
    let beta = (lx.len() >= 3).then(|| slope(&lx, &ly));
    Ok(CriticalEstimate { p_c, peaks, beta })
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    line_fit(x, y).map_or(f64::NAN, |(_, b)| b)
}
