//! Small dense linear algebra, generic over [`Real`].
//!
//! Matrices are row-major `Vec<T>` of size `n × n`. Sizes stay at desk scale
//! (a few hundred at most), so nothing here is blocked or sparse.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::precision::Real;

/// Solves `a · x = b` in place by Gaussian elimination with partial
/// pivoting. Returns `None` on an exactly singular pivot.
pub fn solve<T: Real>(a: &mut [T], n: usize, b: &mut [T]) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best.to_f64() == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col].div_r(d);
            if factor.to_f64() == 0.0 {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc = acc - a[col * n + k] * b[k];
        }
        b[col] = acc.div_r(a[col * n + col]);
    }
    Some(())
}

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    /// Pivots too small to be signed at the working precision.
    pub unresolved: usize,
    pub positive: usize,
}

/// Inertia of a symmetric matrix by `L·D·Lᵀ` with symmetric diagonal
/// pivoting (Sylvester's law). Pivots with `|d| ≤ tol` count as unresolved.
pub fn inertia<T: Real>(mat: &[T], n: usize, tol: f64) -> Inertia {
    let mut a = mat.to_vec();
    let mut order: Vec<usize> = (0..n).collect();
    let mut out = Inertia { negative: 0, unresolved: 0, positive: 0 };
    for step in 0..n {
        // Largest remaining diagonal entry.
        let mut best = step;
        for k in step + 1..n {
            let (ik, ib) = (order[k], order[best]);
            if a[ik * n + ik].abs() > a[ib * n + ib].abs() {
                best = k;
            }
        }
        order.swap(step, best);
        let p = order[step];
        let d = a[p * n + p];
        let df = d.to_f64();
        if df.abs() <= tol {
            out.unresolved += 1;
            if df == 0.0 {
                continue;
            }
        } else if df < 0.0 {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
        for r in step + 1..n {
            let i = order[r];
            let l = a[i * n + p].div_r(d);
            if l.to_f64() == 0.0 {
                continue;
            }
            for c in step + 1..n {
                let j = order[c];
                a[i * n + j] = a[i * n + j] - l * a[p * n + j];
            }
        }
    }
    out
}

/// Eigenvalues of a symmetric `f64` matrix, ascending.
pub fn symmetric_eigenvalues(mat: &[f64], n: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n, n, mat);
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest absolute row sum.
pub fn norm_inf<T: Real>(mat: &[T], n: usize) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| mat[i * n + j].to_f64().abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
