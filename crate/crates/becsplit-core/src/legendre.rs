//! Normalized Legendre polynomials, their recursion coefficients, and
//! Gauss–Legendre quadrature on [−1, 1].
//!
//! The basis is orthonormal: ∫₋₁¹ P̃_j P̃_k dx = δ_jk, with P̃₀ = 1/√2 and
//! P̃₁(x) = √(3/2)·x, linked by x·P̃_k = c_{k−1}P̃_{k−1} + c_k·P̃_{k+1}.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Mat;
use crate::math;
use crate::{Error, Result};

/// c_k = (k+1)/√((2k+1)(2k+3)); the three-term recursion coefficient of the
/// normalized basis and the off-diagonal of the moment coupling matrix.
pub fn recursion_coeff(k: usize) -> f64 {
    let kf = k as f64;
    (kf + 1.0) / math::sqrt((2.0 * kf + 1.0) * (2.0 * kf + 3.0))
}

/// Evaluate P̃_k(x) by the normalized three-term recurrence.
pub fn legendre_normalized(k: usize, x: f64) -> f64 {
    debug_assert!(math::abs(x) <= 1.0 + 1e-12);
    let mut prev = 1.0 / math::sqrt(2.0);
    if k == 0 {
        return prev;
    }
    let mut cur = math::sqrt(1.5) * x;
    for j in 1..k {
        let next = (x * cur - recursion_coeff(j - 1) * prev) / recursion_coeff(j);
        prev = cur;
        cur = next;
    }
    cur
}

/// First `count` values P̃₀(x) … P̃_{count−1}(x).
pub fn legendre_normalized_upto(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0 / math::sqrt(2.0));
    if count == 1 {
        return out;
    }
    out.push(math::sqrt(1.5) * x);
    for j in 1..count - 1 {
        let next = (x * out[j] - recursion_coeff(j - 1) * out[j - 1]) / recursion_coeff(j);
        out.push(next);
    }
    out
}

/// Nodes and positive weights of a quadrature rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss–Legendre rule with `n` nodes; exact through polynomial degree
    /// 2n − 1. Nodes are Newton-refined roots of P_n.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-angle initial guess for the i-th positive root.
            let mut z = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            for _ in 0..100 {
                let (p, dp) = legendre_and_derivative(n, z);
                let dz = p / dp;
                z -= dz;
                if math::abs(dz) < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_and_derivative(n, z);
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            weights[i] = w;
            nodes[n - 1 - i] = z;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            // Exact center node for odd rules.
            nodes[n / 2] = 0.0;
            let (_, dp) = legendre_and_derivative(n, 0.0);
            weights[n / 2] = 2.0 / (dp * dp);
        }
        QuadratureRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Unnormalized Legendre P_n and its derivative, for the Newton solve.
fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Affine chart between the physical interval K = [1−δ, 1+δ] and the
/// Legendre domain: ε = 1 + δ·ε* with ε* ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleParameterMap {
    delta: f64,
}

impl EnsembleParameterMap {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Invalid("ensemble half-width must lie in (0, 1)".into()));
        }
        Ok(EnsembleParameterMap { delta })
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn eps(&self, eps_star: f64) -> f64 {
        1.0 + self.delta * eps_star
    }

    #[inline]
    pub fn eps_star(&self, eps: f64) -> f64 {
        (eps - 1.0) / self.delta
    }
}

/// Moment coupling matrix: symmetric tridiagonal with zero diagonal and
/// off-diagonal (c₀, …, c_{N−2}). Its eigenvalues are the degree-N
/// Gauss–Legendre nodes.
pub fn coupling_tridiagonal(n: usize) -> Result<Mat> {
    if n < 2 {
        return Err(Error::Invalid("coupling matrix needs at least two moments".into()));
    }
    let mut m = Mat::zeros(n, n);
    for k in 0..n - 1 {
        let c = recursion_coeff(k);
        m[(k, k + 1)] = c;
        m[(k + 1, k)] = c;
    }
    Ok(m)
}

/// Off-diagonal (c₀, …, c_{N−2}) of the coupling matrix in tridiagonal form.
pub(crate) fn coupling_off_diagonal(n: usize) -> Vec<f64> {
    (0..n.saturating_sub(1)).map(recursion_coeff).collect()
}
