//! Small dense linear algebra kernel: LU factorization with partial pivoting
//! over row-major matrices.
//!
//! The systems solved here are of the form `Z = X - (X-I)P` with `X` diagonal
//! and `P` row-stochastic; they are strictly diagonally dominant by rows, so
//! partial pivoting is already overkill — it is kept for robustness. One
//! factorization serves plain solves, transpose solves (needed by the
//! analytic gradient) and full inversion (needed by the rank-one greedy).

use crate::error::{Error, Result};

/// LU factors of a square matrix, `P·A = L·U`, stored packed in row-major
/// order with the pivot swaps recorded LAPACK-style (`piv[k]` is the row
/// swapped with row `k` at step `k`).
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

/// Factor a row-major `n×n` matrix. Consumes the buffer and factors in place.
pub fn lu_factor(mut a: Vec<f64>, n: usize) -> Result<LuFactors> {
    assert_eq!(a.len(), n * n, "matrix buffer has wrong length");
    let mut piv = vec![0usize; n];
    for k in 0..n {
        let mut p = k;
        let mut max = a[k * n + k].abs();
        for r in k + 1..n {
            let v = a[r * n + k].abs();
            if v > max {
                max = v;
                p = r;
            }
        }
        if max == 0.0 {
            return Err(Error::Solver(format!("singular matrix at pivot column {k}")));
        }
        piv[k] = p;
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
        }
        let pivot = a[k * n + k];
        for r in k + 1..n {
            let m = a[r * n + k] / pivot;
            a[r * n + k] = m;
            if m != 0.0 {
                let (head, tail) = a.split_at_mut(r * n);
                let krow = &head[k * n + k + 1..k * n + n];
                let rrow = &mut tail[k + 1..n];
                for (rv, kv) in rrow.iter_mut().zip(krow) {
                    *rv -= m * kv;
                }
            }
        }
    }
    Ok(LuFactors { n, lu: a, piv })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b`.
    #[allow(clippy::needless_range_loop)] // index form keeps the triangular sweeps readable
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        // L y = P b  (unit lower triangular)
        for i in 1..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= self.lu[i * n + k] * x[k];
            }
            x[i] = acc;
        }
        // U x = y
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.lu[i * n + k] * x[k];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    /// Solve `Aᵀ x = b` from the same factorization (`Aᵀ = Uᵀ Lᵀ P`).
    #[allow(clippy::needless_range_loop)] // index form keeps the triangular sweeps readable
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        // Uᵀ y = b  (lower triangular with U's diagonal)
        for i in 0..n {
            let mut acc = x[i];
            for k in 0..i {
                acc -= self.lu[k * n + i] * x[k];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        // Lᵀ w = y  (unit upper triangular)
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in i + 1..n {
                acc -= self.lu[k * n + i] * x[k];
            }
            x[i] = acc;
        }
        // x = Pᵀ w: undo the swaps in reverse order.
        for k in (0..n).rev() {
            x.swap(k, self.piv[k]);
        }
        x
    }

    /// Full inverse, row-major. Works on whole rows of the right-hand-side
    /// identity so the inner loops stay contiguous.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut x = vec![0.0; n * n];
        for i in 0..n {
            x[i * n + i] = 1.0;
        }
        for k in 0..n {
            if self.piv[k] != k {
                let (a, b) = (k, self.piv[k]);
                let (lo, hi) = (a.min(b), a.max(b));
                let (head, tail) = x.split_at_mut(hi * n);
                head[lo * n..lo * n + n].swap_with_slice(&mut tail[..n]);
            }
        }
        // Forward: X ← L⁻¹ X, row by row.
        for i in 1..n {
            let (done, rest) = x.split_at_mut(i * n);
            let xi = &mut rest[..n];
            for k in 0..i {
                let m = self.lu[i * n + k];
                if m != 0.0 {
                    let xk = &done[k * n..k * n + n];
                    for (a, b) in xi.iter_mut().zip(xk) {
                        *a -= m * b;
                    }
                }
            }
        }
        // Backward: X ← U⁻¹ X.
        for i in (0..n).rev() {
            let (head, tail) = x.split_at_mut((i + 1) * n);
            let xi = &mut head[i * n..];
            for k in i + 1..n {
                let m = self.lu[i * n + k];
                if m != 0.0 {
                    let xk = &tail[(k - i - 1) * n..(k - i - 1) * n + n];
                    for (a, b) in xi.iter_mut().zip(xk) {
                        *a -= m * b;
                    }
                }
            }
            let d = 1.0 / self.lu[i * n + i];
            for a in xi.iter_mut() {
                *a *= d;
            }
        }
        x
    }
}

/// `y = M x` for a row-major `n×n` matrix.
pub fn mat_vec(m: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    assert_eq!(m.len(), n * n);
    assert_eq!(x.len(), n);
    (0..n)
        .map(|i| m[i * n..i * n + n].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// ∞-norm of a vector.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Sum by pairwise (cascade) reduction in index order. Deterministic and
/// considerably more accurate than a running sum for large inputs.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
