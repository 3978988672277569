//! Small dense least-squares helpers shared by the fitting code.

/// Least-squares coefficients for `y ≈ Σ c_j f_j(x)` where `rows[i]` holds
/// the basis values `f_j(x_i)`. `None` when the normal equations are
/// singular.
pub(crate) fn least_squares<const K: usize>(rows: &[[f64; K]], y: &[f64]) -> Option<[f64; K]> {
    let mut a = [[0.0f64; K]; K];
    let mut b = [0.0f64; K];
    for (row, &yi) in rows.iter().zip(y) {
        for r in 0..K {
            for c in 0..K {
                a[r][c] += row[r] * row[c];
            }
            b[r] += row[r] * yi;
        }
    }
    let scale = (0..K).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for col in 0..K {
        let pivot = (col..K).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..K {
            if r != col {
                let f = a[r][col] / a[col][col];
                let pivot_row = a[col];
                for (x, p) in a[r][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut out = [0.0; K];
    for i in 0..K {
        out[i] = b[i] / a[i][i];
    }
    Some(out)
}

/// `(intercept, slope)` of the ordinary least-squares line.
pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let rows: Vec<[f64; 2]> = x.iter().map(|&xi| [1.0, xi]).collect();
    least_squares(&rows, y).map(|[a, b]| (a, b))
}

/// Minimiser of a function on `[lo, hi]` by golden-section search, assuming
/// it is unimodal there.
pub(crate) fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}
