//! Small dense linear solves used by Newton iterations.

use crate::scalar::Scalar;

/// Solves `a x = b` for a row-major `n x n` matrix by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol` times the largest entry.
pub fn solve_dense<T: Scalar>(a: &[T], b: &[T], tol: T) -> Option<Vec<T>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .abs()
                    .partial_cmp(&m[j * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if !(m[piv * n + col].abs() > tol * scale) {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            x.swap(piv, col);
        }
        for row in col + 1..n {
            let f = m[row * n + col] / m[col * n + col];
            if f != T::zero() {
                for k in col..n {
                    let v = m[col * n + k];
                    m[row * n + k] -= f * v;
                }
                let v = x[col];
                x[row] -= f * v;
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for k in col + 1..n {
            s -= m[col * n + k] * x[k];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}
