//! Symmetric tridiagonal eigendecomposition and SPD tridiagonal solves.
//!
//! Every light-shift operator in this crate is symmetric tridiagonal, so the
//! QL sweep below is the workhorse behind all exact propagators.

use alloc::vec;
use alloc::vec::Vec;

use super::mat::Mat;
use crate::math;

/// Full eigendecomposition of a symmetric tridiagonal matrix given its
/// diagonal and subdiagonal. Returns eigenvalues in ascending order and the
/// orthogonal matrix of eigenvectors as columns.
///
/// Implicit-shift QL with eigenvector accumulation; O(n³) worst case but in
/// practice a handful of sweeps per eigenvalue.
pub fn eig_sym_tridiag(diag: &[f64], off: &[f64]) -> (Vec<f64>, Mat) {
    let n = diag.len();
    assert!(n >= 1, "empty matrix");
    assert_eq!(off.len(), n - 1, "subdiagonal length must be n-1");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = Mat::identity(n);

    for l in 0..n {
        let mut iter = 0;
        loop {
            // Locate the unreduced block starting at l.
            let mut m = l;
            while m + 1 < n {
                let dd = math::abs(d[m]) + math::abs(d[m + 1]);
                if math::abs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 64, "tridiagonal QL iteration failed to converge");

            // Wilkinson-style shift from the leading 2x2.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = math::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + math::copysign(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = math::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    // Lost orthogonality in a fully deflated rotation; restart.
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[(k, i + 1)];
                    z[(k, i + 1)] = s * z[(k, i)] + c * f;
                    z[(k, i)] = c * z[(k, i)] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Sort eigenpairs ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (jc, &jo) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, jc)] = z[(i, jo)];
        }
    }
    (values, vectors)
}

/// LDLᵀ factorization of a symmetric positive-definite tridiagonal matrix.
pub struct TridiagLdl {
    dfac: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagLdl {
    /// Factor the matrix with diagonal `d` and subdiagonal `e`.
    pub fn factor(d: &[f64], e: &[f64]) -> Self {
        let n = d.len();
        assert_eq!(e.len(), n.saturating_sub(1));
        let mut dfac = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        dfac[0] = d[0];
        assert!(dfac[0] > 0.0, "tridiagonal matrix is not positive definite");
        for i in 0..n - 1 {
            sub[i] = e[i] / dfac[i];
            dfac[i + 1] = d[i + 1] - sub[i] * e[i];
            assert!(dfac[i + 1] > 0.0, "tridiagonal matrix is not positive definite");
        }
        TridiagLdl { dfac, sub }
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.dfac.len();
        debug_assert_eq!(b.len(), n);
        debug_assert_eq!(x.len(), n);
        x.copy_from_slice(b);
        for i in 1..n {
            x[i] -= self.sub[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.dfac[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.sub[i] * x[i + 1];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.solve_into(b, &mut x);
        x
    }
}
