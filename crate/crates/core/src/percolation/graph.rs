use rand::seq::SliceRandom;
use rand::Rng;

use super::PercolationError;
use crate::typegraph::TypeGraph;

/// Disjoint sets with union by size and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = self.parent[x] as usize;
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        true
    }

    /// Size of the set containing `x`.
    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Simple bipartite graph: no duplicate edges, ids in range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    edges: Vec<(u32, u32)>,
}

impl BipartiteGraph {
    pub fn new(
        n_left: usize,
        n_right: usize,
        mut edges: Vec<(u32, u32)>,
    ) -> Result<Self, PercolationError> {
        if n_left == 0 || n_right == 0 {
            return Err(PercolationError::InvalidGraph(
                "both sides need at least one node".into(),
            ));
        }
        if let Some(&(l, r)) = edges
            .iter()
            .find(|&&(l, r)| l as usize >= n_left || r as usize >= n_right)
        {
            return Err(PercolationError::InvalidGraph(format!(
                "edge ({l}, {r}) out of range"
            )));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(PercolationError::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self {
            n_left,
            n_right,
            edges,
        })
    }

    /// Entity × descriptor graph of the seen edges of a type graph.
    pub fn from_seen_descriptors(graph: &TypeGraph) -> Self {
        let edges = (0..graph.n_entities() as u32)
            .flat_map(|e| graph.seen_descriptors(e).iter().map(move |&k| (e, k)))
            .collect();
        Self::new(graph.n_entities(), graph.n_descriptors(), edges)
            .expect("type graph edges are simple")
    }

    /// Configuration-model graph: degree sequences drawn from `left` and
    /// `right`, stubs matched uniformly and duplicate edges dropped. When the
    /// stub totals differ, surplus stubs of the larger side are discarded at
    /// random.
    pub fn configuration<R: Rng + ?Sized>(
        n_left: usize,
        n_right: usize,
        left: &DegreeDistribution,
        right: &DegreeDistribution,
        rng: &mut R,
    ) -> Result<Self, PercolationError> {
        check_consistent(n_left, n_right, left, right)?;
        let stubs = |n: usize, dist: &DegreeDistribution, rng: &mut R| {
            let mut s = Vec::new();
            for i in 0..n as u32 {
                s.extend(std::iter::repeat_n(i, dist.sample(rng)));
            }
            s
        };
        let mut ls = stubs(n_left, left, rng);
        let mut rs = stubs(n_right, right, rng);
        ls.shuffle(rng);
        rs.shuffle(rng);
        let mut edges: Vec<(u32, u32)> = ls.into_iter().zip(rs).collect();
        edges.sort_unstable();
        edges.dedup();
        Self::new(n_left, n_right, edges)
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    /// Edges sorted by `(left, right)`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_left];
        for &(l, _) in &self.edges {
            d[l as usize] += 1;
        }
        d
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_right];
        for &(_, r) in &self.edges {
            d[r as usize] += 1;
        }
        d
    }
}

/// Mean degrees must balance the edge count seen from both sides.
pub(super) fn check_consistent(
    n_left: usize,
    n_right: usize,
    left: &DegreeDistribution,
    right: &DegreeDistribution,
) -> Result<(), PercolationError> {
    let (a, b) = (n_left as f64 * left.mean(), n_right as f64 * right.mean());
    if (a - b).abs() > 0.01 * a.max(b) {
        return Err(PercolationError::InvalidDistribution(format!(
            "edge counts disagree: {n_left}·{:.4} vs {n_right}·{:.4}",
            left.mean(),
            right.mean()
        )));
    }
    Ok(())
}

/// Degree distribution with finite support, `pmf[k] = P(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl DegreeDistribution {
    pub fn new(pmf: Vec<f64>) -> Result<Self, PercolationError> {
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(PercolationError::InvalidDistribution(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(PercolationError::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let cdf = pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { pmf, cdf })
    }

    /// All mass on degree `k`.
    pub fn delta(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        Self::new(pmf).expect("valid")
    }

    /// Poisson with the given mean, truncated where the remaining tail mass
    /// drops below 1e-15 and renormalised.
    pub fn poisson(mean: f64) -> Result<Self, PercolationError> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(PercolationError::InvalidDistribution(format!(
                "poisson mean {mean}"
            )));
        }
        let mut pmf = vec![(-mean).exp()];
        let mut total = pmf[0];
        let mut k = 0;
        while 1.0 - total > 1e-15 && (k as f64) < mean + 50.0 * (mean.sqrt() + 1.0) {
            k += 1;
            let next = pmf[k - 1] * mean / k as f64;
            pmf.push(next);
            total += next;
        }
        Self::new(pmf.into_iter().map(|p| p / total).collect())
    }

    /// Empirical distribution of observed degrees.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self, PercolationError> {
        if degrees.is_empty() {
            return Err(PercolationError::InvalidDistribution("no degrees".into()));
        }
        let max = *degrees.iter().max().expect("nonempty");
        let mut counts = vec![0usize; max + 1];
        for &d in degrees {
            counts[d] += 1;
        }
        let n = degrees.len() as f64;
        Self::new(counts.into_iter().map(|c| c as f64 / n).collect())
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// `⟨k⟩`.
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// `⟨k(k−1)⟩`.
    pub fn factorial_moment2(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * (k as f64 - 1.0) * p)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.pmf.len() - 1)
    }
}
