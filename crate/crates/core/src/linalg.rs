//! Dense solve by Gaussian elimination with complete pivoting.

use alloc::vec::Vec;

/// Why a system was rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singular {
    pub min_pivot: f64,
    pub max_pivot: f64,
}

/// Solves `a · x = b` for square row-major `a` of order `b.len()`.
///
/// Elimination picks the largest remaining entry as pivot at every step. The
/// system is rejected when the smallest pivot magnitude falls below
/// `rel_tol` times the largest one.
pub fn solve_pivoted(a: &[f64], b: &[f64], rel_tol: f64) -> Result<Vec<f64>, Singular> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix is not {n}x{n}");
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;

    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for r in k..n {
            for c in k..n {
                let v = m[r * n + c].abs();
                if v > best {
                    (pr, pc, best) = (r, c, v);
                }
            }
        }
        if pr != k {
            for c in 0..n {
                m.swap(k * n + c, pr * n + c);
            }
            rhs.swap(k, pr);
        }
        if pc != k {
            for r in 0..n {
                m.swap(r * n + k, r * n + pc);
            }
            col_perm.swap(k, pc);
        }
        max_pivot = max_pivot.max(best);
        min_pivot = min_pivot.min(best);
        if !(best > 0.0) {
            return Err(Singular { min_pivot, max_pivot });
        }
        let pivot = m[k * n + k];
        for r in k + 1..n {
            let f = m[r * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            m[r * n + k] = 0.0;
            for c in k + 1..n {
                m[r * n + c] -= f * m[k * n + c];
            }
            rhs[r] -= f * rhs[k];
        }
    }
    if min_pivot < rel_tol * max_pivot {
        return Err(Singular { min_pivot, max_pivot });
    }

    let mut y = alloc::vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for c in k + 1..n {
            s -= m[k * n + c] * y[c];
        }
        y[k] = s / m[k * n + k];
    }
    let mut x = alloc::vec![0.0; n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = y[k];
    }
    Ok(x)
}
