use std::collections::VecDeque;

use super::{PercolationError, UnionFind};

/// Entity × property matrix with entries in `[0, 1]`, stored as sorted
/// sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptDensityMatrix {
    n_cols: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl ConceptDensityMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Result<Self, PercolationError> {
        if n_rows == 0 || n_cols == 0 {
            return Err(PercolationError::InvalidMatrix(
                "dimensions must be positive".into(),
            ));
        }
        if n_cols > u32::MAX as usize {
            return Err(PercolationError::InvalidMatrix("too many columns".into()));
        }
        Ok(Self {
            n_cols,
            rows: vec![Vec::new(); n_rows],
        })
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, PercolationError> {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), n_cols)?;
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(PercolationError::InvalidMatrix(format!(
                    "row {r} has {} columns, expected {n_cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v)?;
            }
        }
        Ok(m)
    }

    /// Binary matrix with ones at `pairs`.
    pub fn from_pairs(
        n_rows: usize,
        n_cols: usize,
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, PercolationError> {
        let mut m = Self::zeros(n_rows, n_cols)?;
        for (r, c) in pairs {
            m.set(r as usize, c as usize, 1.0)?;
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) -> Result<(), PercolationError> {
        if r >= self.rows.len() || c >= self.n_cols {
            return Err(PercolationError::InvalidMatrix(format!(
                "index ({r}, {c}) out of range"
            )));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(PercolationError::InvalidMatrix(format!(
                "entry ({r}, {c}) = {v} outside [0, 1]"
            )));
        }
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&(c as u32), |e| e.0) {
            Ok(i) if v == 0.0 => {
                row.remove(i);
            }
            Ok(i) => row[i].1 = v,
            Err(_) if v == 0.0 => {}
            Err(i) => row.insert(i, (c as u32, v)),
        }
        Ok(())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.rows[r];
        row.binary_search_by_key(&(c as u32), |e| e.0)
            .map_or(0.0, |i| row[i].1)
    }

    /// Nonzero entries of row `r` as `(column, value)`, by column.
    pub fn row(&self, r: usize) -> &[(u32, f64)] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_binary(&self) -> bool {
        self.rows.iter().flatten().all(|e| e.1 == 1.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; self.n_cols];
                for &(c, v) in row {
                    out[c as usize] = v;
                }
                out
            })
            .collect()
    }

    /// Nonzero count per row.
    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Nonzero count per column.
    pub fn col_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_cols];
        for &(c, _) in self.rows.iter().flatten() {
            d[c as usize] += 1;
        }
        d
    }

    /// Positions of the nonzero entries, row-major.
    pub fn support(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, _)| (r as u32, c)))
    }
}

/// `(D Dᵀ)ⁿ D`, evaluated as `n` rounds of `T ← D (Dᵀ T)`.
fn propagate_with<T: Copy>(
    d: &ConceptDensityMatrix,
    n: usize,
    lift: impl Fn(f64) -> T,
    zero: T,
    add: impl Fn(T, T) -> T,
    mul: impl Fn(T, T) -> T,
) -> Vec<Vec<T>> {
    let cols = d.n_cols();
    let mut t: Vec<Vec<T>> = d
        .to_dense()
        .into_iter()
        .map(|r| r.into_iter().map(&lift).collect())
        .collect();
    for _ in 0..n {
        let mut u = vec![vec![zero; cols]; cols];
        for (e, row) in d.rows.iter().enumerate() {
            for &(k, v) in row {
                let v = lift(v);
                for (acc, &x) in u[k as usize].iter_mut().zip(&t[e]) {
                    *acc = add(*acc, mul(v, x));
                }
            }
        }
        for (e, row) in d.rows.iter().enumerate() {
            let mut out = vec![zero; cols];
            for &(k, v) in row {
                let v = lift(v);
                for (acc, &x) in out.iter_mut().zip(&u[k as usize]) {
                    *acc = add(*acc, mul(v, x));
                }
            }
            t[e] = out;
        }
    }
    t
}

/// The `n`-th order propagation matrix `T⁽ⁿ⁾ = (D Dᵀ)ⁿ D`.
pub fn propagate(d: &ConceptDensityMatrix, n: usize) -> Vec<Vec<f64>> {
    propagate_with(d, n, |x| x, 0.0, |a, b| a + b, |a, b| a * b)
}

/// Exact integer `T⁽ⁿ⁾` of a binary matrix; `None` if `d` is not binary or an
/// entry overflows `u64`.
pub fn propagate_counts(d: &ConceptDensityMatrix, n: usize) -> Option<Vec<Vec<u64>>> {
    if !d.is_binary() {
        return None;
    }
    let t = propagate_with(
        d,
        n,
        |x| Some(x as u64),
        Some(0u64),
        |a, b| a?.checked_add(b?),
        |a, b| a?.checked_mul(b?),
    );
    t.into_iter().map(|row| row.into_iter().collect()).collect()
}

/// Nonzero pattern of `T⁽ⁿ⁾`: exact counts when they fit, otherwise
/// floating point with nonzero meaning `> 1e-12`.
pub fn propagation_support(d: &ConceptDensityMatrix, n: usize) -> Vec<Vec<bool>> {
    match propagate_counts(d, n) {
        Some(t) => t
            .into_iter()
            .map(|r| r.into_iter().map(|x| x > 0).collect())
            .collect(),
        None => propagate(d, n)
            .into_iter()
            .map(|r| r.into_iter().map(|x| x > 1e-12).collect())
            .collect(),
    }
}

/// `(e, k)` is true iff the shortest alternating path between entity `e` and
/// property `k` over nonzero entries has at most `2n + 1` edges.
pub fn reachable_within(d: &ConceptDensityMatrix, n: usize) -> Vec<Vec<bool>> {
    let (rows, cols) = (d.n_rows(), d.n_cols());
    let mut by_col: Vec<Vec<u32>> = vec![Vec::new(); cols];
    for (r, c) in d.support() {
        by_col[c as usize].push(r);
    }
    let limit = 2 * n + 1;
    (0..rows)
        .map(|start| {
            // Distances in edges; entities sit at even, properties at odd depths.
            let mut row_dist = vec![usize::MAX; rows];
            let mut col_dist = vec![usize::MAX; cols];
            let mut queue = VecDeque::from([start]);
            row_dist[start] = 0;
            while let Some(e) = queue.pop_front() {
                let de = row_dist[e];
                if de + 1 > limit {
                    continue;
                }
                for &(k, _) in d.row(e) {
                    let k = k as usize;
                    if col_dist[k] != usize::MAX {
                        continue;
                    }
                    col_dist[k] = de + 1;
                    for &e2 in &by_col[k] {
                        let e2 = e2 as usize;
                        if row_dist[e2] == usize::MAX {
                            row_dist[e2] = de + 2;
                            queue.push_back(e2);
                        }
                    }
                }
            }
            col_dist.into_iter().map(|x| x <= limit).collect()
        })
        .collect()
}

/// Connected components of the bipartite graph of nonzero entries. Labels are
/// numbered by first appearance, rows before columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub count: usize,
}

impl Components {
    /// `(rows, cols)` of every component, in label order.
    pub fn groups(&self) -> Vec<(Vec<u32>, Vec<u32>)> {
        let mut out = vec![(Vec::new(), Vec::new()); self.count];
        for (i, &l) in self.rows.iter().enumerate() {
            out[l].0.push(i as u32);
        }
        for (i, &l) in self.cols.iter().enumerate() {
            out[l].1.push(i as u32);
        }
        out
    }
}

pub fn concept_components(d: &ConceptDensityMatrix) -> Components {
    let rows = d.n_rows();
    let mut uf = UnionFind::new(rows + d.n_cols());
    for (r, c) in d.support() {
        uf.union(r as usize, rows + c as usize);
    }
    let mut label = vec![usize::MAX; rows + d.n_cols()];
    let mut count = 0;
    let labels: Vec<usize> = (0..rows + d.n_cols())
        .map(|i| {
            let root = uf.find(i);
            if label[root] == usize::MAX {
                label[root] = count;
                count += 1;
            }
            label[root]
        })
        .collect();
    Components {
        rows: labels[..rows].to_vec(),
        cols: labels[rows..].to_vec(),
        count,
    }
}
