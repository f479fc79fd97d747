//! Perron–Frobenius data of small nonnegative sparse matrices and dense
//! linear solves.

use crate::error::{Error, Result};

pub(crate) const TOL: f64 = 1e-12;
pub(crate) const MAX_ITER: usize = 100_000;

/// Sparse nonnegative matrix stored by rows: `rows[u]` lists `(v, L_uv)`.
pub(crate) type Rows = Vec<Vec<(usize, f64)>>;

#[derive(Clone, Debug)]
pub(crate) struct Perron {
    pub lambda: f64,
    /// Collatz–Wielandt bracket on the spectral radius.
    pub lower: f64,
    pub upper: f64,
    pub right: Vec<f64>,
    pub iterations: usize,
}

pub(crate) fn transpose(rows: &Rows) -> Rows {
    let mut t = vec![Vec::new(); rows.len()];
    for (u, r) in rows.iter().enumerate() {
        for &(v, w) in r {
            t[v].push((u, w));
        }
    }
    t
}

/// Perron root and positive right eigenvector of an irreducible matrix.
///
/// Iterates with `L + cI`, c the mean row sum, which is primitive whenever L
/// is irreducible, so periodic graphs converge too.
pub(crate) fn perron(rows: &Rows) -> Result<Perron> {
    let n = rows.len();
    assert!(n > 0);
    let total: f64 = rows.iter().flatten().map(|&(_, w)| w).sum();
    let c = total / n as f64;
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let (mut lo, mut hi) = (0.0, f64::INFINITY);
    for it in 1..=MAX_ITER {
        for (u, r) in rows.iter().enumerate() {
            y[u] = r.iter().map(|&(v, w)| w * x[v]).sum();
        }
        lo = f64::INFINITY;
        hi = 0.0f64;
        for u in 0..n {
            let q = y[u] / x[u];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if hi - lo <= TOL * hi {
            let lambda = 0.5 * (lo + hi);
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|a| *a /= s);
            return Ok(Perron {
                lambda,
                lower: lo,
                upper: hi,
                right: x,
                iterations: it,
            });
        }
        let mut norm = 0.0;
        for u in 0..n {
            x[u] = y[u] + c * x[u];
            norm += x[u];
        }
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x.iter_mut().for_each(|a| *a /= norm);
        // keep entries strictly positive against underflow
        if x.iter().any(|&a| a <= 0.0) {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITER,
        lower: lo,
        upper: hi,
        gap: if hi > 0.0 { (hi - lo) / hi } else { f64::NAN },
    })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::invalid("singular linear system"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Stationary distribution of an irreducible row-stochastic matrix.
pub(crate) fn stationary(p: &Rows) -> Result<Vec<f64>> {
    let n = p.len();
    // (Pᵀ − I) π = 0 with the last equation replaced by Σ π = 1
    let mut a = vec![vec![0.0; n]; n];
    for (u, r) in p.iter().enumerate() {
        for &(v, w) in r {
            a[v][u] += w;
        }
        a[u][u] -= 1.0;
    }
    a[n - 1] = vec![1.0; n];
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let mut pi = solve(a, b)?;
    for x in &mut pi {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    Ok(pi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perron_of_small_matrices() {
        let full: Rows = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]];
        assert!((perron(&full).unwrap().lambda - 2.0).abs() < 1e-12);
        let cycle: Rows = vec![vec![(1, 1.0)], vec![(0, 1.0)]];
        assert!((perron(&cycle).unwrap().lambda - 1.0).abs() < 1e-12);
        // golden mean shift
        let gm: Rows = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0)]];
        let p = perron(&gm).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.lambda - phi).abs() < 1e-12);
        assert!(p.lower <= p.lambda && p.lambda <= p.upper);
        assert!((p.right[0] / p.right[1] - phi).abs() < 1e-9);
    }

    #[test]
    fn stationary_of_two_state_chain() {
        let p: Rows = vec![vec![(0, 0.9), (1, 0.1)], vec![(0, 0.5), (1, 0.5)]];
        let pi = stationary(&p).unwrap();
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-14);
    }
}
