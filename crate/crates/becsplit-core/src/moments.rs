//! Legendre moment representation of the ε-parameterized ensemble.
//!
//! A state family C(t, ε*) on ε* ∈ [−1, 1] is lifted to moments
//! m_k(t) = ∫ C(t, ε*) P̃_k(ε*) dε*, truncated at order N. The moment vector
//! m = [m₀; …; m_{N−1}] evolves under the Kronecker-structured generator
//!
//!   M(Ω) = I(N) ⊗ A(1, Ω) ⊗ J + 𝒞(N) ⊗ (A(δ, Ω) − A(δ, 0)) ⊗ J,
//!
//! which is skew-symmetric, so moment norms are conserved. Because 𝒞(N)
//! diagonalizes to the degree-N Gauss–Legendre nodes, the same dynamics are
//! orthogonally equivalent to N uncoupled copies of the single-ε system at
//! the node values ε_j = 1 + δx_j; [`NodeBasis`] carries that change of
//! basis for the fast solver paths.

use alloc::vec;
use alloc::vec::Vec;

use crate::legendre::{coupling_off_diagonal, legendre_normalized_upto, QuadratureRule};
use crate::linalg::{eig_sym_tridiag, Mat};
use crate::math;
use crate::rne::{build_coupling_matrix, real_embed_generator, RealState, TruncationSpec};
use crate::{Error, Result};

/// Guard for accidental huge dense assemblies.
pub const MAX_MOMENT_DIM: usize = 4096;

/// Stacked Legendre moments: N blocks, each an interleaved real state block
/// of length 2(N⁺+1).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    data: Vec<f64>,
    n_moments: usize,
    levels: usize,
}

impl MomentState {
    pub fn zeros(n_moments: usize, spec: &TruncationSpec) -> Self {
        MomentState {
            data: vec![0.0; n_moments * spec.real_dim()],
            n_moments,
            levels: spec.levels(),
        }
    }

    /// Moments of the rest ensemble: block 0 = √2 · rest state, the rest 0.
    pub fn initial_rest(n_moments: usize, spec: &TruncationSpec) -> Self {
        let mut m = Self::zeros(n_moments, spec);
        m.data[0] = math::sqrt(2.0);
        m
    }

    pub fn from_flat(data: Vec<f64>, n_moments: usize, spec: &TruncationSpec) -> Result<Self> {
        if data.len() != n_moments * spec.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: n_moments * spec.real_dim(),
                got: data.len(),
            });
        }
        Ok(MomentState { data, n_moments, levels: spec.levels() })
    }

    #[inline]
    pub fn n_moments(&self) -> usize {
        self.n_moments
    }

    #[inline]
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn block_len(&self) -> usize {
        2 * self.levels
    }

    #[inline]
    pub fn block(&self, k: usize) -> &[f64] {
        let w = self.block_len();
        &self.data[k * w..(k + 1) * w]
    }

    #[inline]
    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.block_len();
        &mut self.data[k * w..(k + 1) * w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|x| x * x).sum())
    }
}

/// Quadrature approximation of the moment transform: block k is
/// Σ_j w_j · P̃_k(x_j) · C(x_j). Samples must be given at the rule's nodes
/// and the rule degree should cover twice the moment order.
pub fn moments_from_ensemble(
    samples: &[RealState],
    rule: &QuadratureRule,
    n_moments: usize,
) -> Result<MomentState> {
    if samples.len() != rule.len() {
        return Err(Error::DimensionMismatch { expected: rule.len(), got: samples.len() });
    }
    let first = samples.first().ok_or(Error::Invalid(
        "moment transform needs at least one sample".into(),
    ))?;
    let width = first.values.len();
    let levels = width / 2;
    let spec = TruncationSpec::new(levels.saturating_sub(1).max(1))?;
    let mut out = if levels >= 2 {
        MomentState::zeros(n_moments, &spec)
    } else {
        return Err(Error::Invalid("states need at least two levels".into()));
    };
    for (j, sample) in samples.iter().enumerate() {
        if sample.values.len() != width {
            return Err(Error::DimensionMismatch { expected: width, got: sample.values.len() });
        }
        let basis = legendre_normalized_upto(n_moments, rule.nodes[j]);
        let w = rule.weights[j];
        for k in 0..n_moments {
            let coeff = w * basis[k];
            let block = out.block_mut(k);
            for (b, s) in block.iter_mut().zip(&sample.values) {
                *b += coeff * s;
            }
        }
    }
    Ok(out)
}

/// Reconstruct the ensemble member at ε* = x: Σ_k m_k · P̃_k(x).
pub fn ensemble_from_moments(m: &MomentState, x: f64) -> RealState {
    let basis = legendre_normalized_upto(m.n_moments(), x);
    let mut values = vec![0.0; m.block_len()];
    for k in 0..m.n_moments() {
        let block = m.block(k);
        let p = basis[k];
        for (v, b) in values.iter_mut().zip(block) {
            *v += p * b;
        }
    }
    RealState { values }
}

/// Symmetric part S(Ω) with M(Ω) = S(Ω) ⊗ J:
/// S = I(N) ⊗ A(1, Ω) + (δΩ/2) · 𝒞(N) ⊗ T.
pub(crate) fn moment_symmetric_part(
    omega: f64,
    delta: f64,
    n_moments: usize,
    spec: &TruncationSpec,
) -> Mat {
    let levels = spec.levels();
    let a1 = build_coupling_matrix(1.0, omega, spec);
    let n_s = n_moments * levels;
    let mut s = Mat::zeros(n_s, n_s);
    // Block-diagonal nominal dynamics.
    for k in 0..n_moments {
        let base = k * levels;
        for i in 0..levels {
            s[(base + i, base + i)] = a1.diag()[i];
            if i + 1 < levels {
                s[(base + i, base + i + 1)] = a1.off_diag()[i];
                s[(base + i + 1, base + i)] = a1.off_diag()[i];
            }
        }
    }
    // Dispersion term couples adjacent moments through (δΩ/2)·T.
    let g = delta * omega / 2.0;
    if g != 0.0 && n_moments >= 2 {
        let c = coupling_off_diagonal(n_moments);
        for k in 0..n_moments - 1 {
            let row = k * levels;
            let col = (k + 1) * levels;
            for i in 0..levels - 1 {
                let t = if i == 0 { math::sqrt(2.0) } else { 1.0 };
                let v = c[k] * g * t;
                s[(row + i, col + i + 1)] += v;
                s[(row + i + 1, col + i)] += v;
                s[(col + i, row + i + 1)] += v;
                s[(col + i + 1, row + i)] += v;
            }
        }
    }
    s
}

/// Dense moment-space generator M(Ω) of dimension N·2(N⁺+1); skew-symmetric.
pub fn build_moment_generator(
    omega: f64,
    delta: f64,
    n_moments: usize,
    spec: &TruncationSpec,
) -> Result<Mat> {
    if n_moments < 1 {
        return Err(Error::Invalid("moment order must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Invalid("ensemble half-width must lie in [0, 1)".into()));
    }
    let dim = n_moments * spec.real_dim();
    if dim > MAX_MOMENT_DIM {
        return Err(Error::TooLarge { dim, max: MAX_MOMENT_DIM });
    }
    let s = moment_symmetric_part(omega, delta, n_moments, spec);
    real_embed_generator(&s)
}

/// Orthogonal change of basis diagonalizing the moment coupling: columns are
/// the 𝒞(N) eigenvectors, eigenvalues are the Gauss–Legendre nodes, and the
/// transformed dynamics decouple into one single-ε system per node.
#[derive(Debug, Clone)]
pub(crate) struct NodeBasis {
    /// Gauss–Legendre nodes x_j in ascending order.
    pub x: Vec<f64>,
    /// N×N orthogonal matrix; column j is the eigenvector at node j.
    pub v: Mat,
}

impl NodeBasis {
    pub fn new(n_moments: usize) -> Self {
        assert!(n_moments >= 1);
        if n_moments == 1 {
            return NodeBasis { x: vec![0.0], v: Mat::identity(1) };
        }
        let off = coupling_off_diagonal(n_moments);
        let (x, v) = eig_sym_tridiag(&vec![0.0; n_moments], &off);
        NodeBasis { x, v }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Apply (Vᵀ ⊗ I): moment blocks → node blocks.
    pub fn to_nodes(&self, m: &MomentState) -> Vec<f64> {
        let n = self.len();
        let w = m.block_len();
        let mut out = vec![0.0; n * w];
        for k in 0..n {
            let block = m.block(k);
            for j in 0..n {
                let coeff = self.v[(k, j)];
                if coeff == 0.0 {
                    continue;
                }
                let dst = &mut out[j * w..(j + 1) * w];
                for (d, b) in dst.iter_mut().zip(block) {
                    *d += coeff * b;
                }
            }
        }
        out
    }

    /// Apply (V ⊗ I): node blocks → moment blocks.
    pub fn from_nodes(&self, nodes: &[f64], spec: &TruncationSpec) -> MomentState {
        let n = self.len();
        let w = spec.real_dim();
        assert_eq!(nodes.len(), n * w);
        let mut m = MomentState::zeros(n, spec);
        for k in 0..n {
            let block = m.block_mut(k);
            for j in 0..n {
                let coeff = self.v[(k, j)];
                if coeff == 0.0 {
                    continue;
                }
                let src = &nodes[j * w..(j + 1) * w];
                for (b, s) in block.iter_mut().zip(src) {
                    *b += coeff * s;
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rne::{propagate_terminal, PulseEnvelope};

    fn spec(n_plus: usize) -> TruncationSpec {
        TruncationSpec::new(n_plus).unwrap()
    }

    fn random_state(levels: usize, seed: usize) -> RealState {
        let values = (0..2 * levels)
            .map(|i| (((seed * 37 + i * 13) % 101) as f64 / 101.0 - 0.5) * 1.8)
            .collect();
        RealState::from_values(values).unwrap()
    }

    #[test]
    fn constant_ensemble_projects_onto_first_moment() {
        let sp = spec(3);
        let rule = QuadratureRule::gauss_legendre(16);
        let base = random_state(sp.levels(), 5);
        let samples: alloc::vec::Vec<RealState> = (0..rule.len()).map(|_| base.clone()).collect();
        let m = moments_from_ensemble(&samples, &rule, 6).unwrap();
        let sqrt2 = 2.0_f64.sqrt();
        for (i, v) in m.block(0).iter().enumerate() {
            assert!((v - sqrt2 * base.values[i]).abs() < 1e-12);
        }
        for k in 1..6 {
            assert!(m.block(k).iter().all(|&v| v.abs() < 1e-12), "block {k} not zero");
        }
    }

    #[test]
    fn linear_ensemble_projects_onto_second_moment() {
        let sp = spec(2);
        let rule = QuadratureRule::gauss_legendre(16);
        let base = random_state(sp.levels(), 11);
        let samples: alloc::vec::Vec<RealState> = rule
            .nodes
            .iter()
            .map(|&x| {
                RealState::from_values(base.values.iter().map(|v| v * x).collect()).unwrap()
            })
            .collect();
        let m = moments_from_ensemble(&samples, &rule, 5).unwrap();
        let coeff = (2.0f64 / 3.0).sqrt();
        for (i, v) in m.block(1).iter().enumerate() {
            assert!((v - coeff * base.values[i]).abs() < 1e-12);
        }
        for k in [0, 2, 3, 4] {
            assert!(m.block(k).iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn transform_round_trips_polynomial_ensembles() {
        // Degree N−1 ensembles are represented exactly.
        let sp = spec(2);
        let n_moments = 6;
        let rule = QuadratureRule::gauss_legendre(16);
        let coeff_blocks: alloc::vec::Vec<RealState> =
            (0..n_moments).map(|k| random_state(sp.levels(), k + 3)).collect();
        let samples: alloc::vec::Vec<RealState> = rule
            .nodes
            .iter()
            .map(|&x| {
                let basis = crate::legendre::legendre_normalized_upto(n_moments, x);
                let mut values = alloc::vec![0.0; sp.real_dim()];
                for (k, b) in coeff_blocks.iter().enumerate() {
                    for (v, c) in values.iter_mut().zip(&b.values) {
                        *v += basis[k] * c;
                    }
                }
                RealState::from_values(values).unwrap()
            })
            .collect();
        let m = moments_from_ensemble(&samples, &rule, n_moments).unwrap();
        for k in 0..n_moments {
            for (a, b) in m.block(k).iter().zip(&coeff_blocks[k].values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        // Reconstruction at the nodes reproduces the samples, and the
        // projector is idempotent.
        for (j, &x) in rule.nodes.iter().enumerate() {
            let rec = ensemble_from_moments(&m, x);
            for (a, b) in rec.values.iter().zip(&samples[j].values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let rec_samples: alloc::vec::Vec<RealState> =
            rule.nodes.iter().map(|&x| ensemble_from_moments(&m, x)).collect();
        let m2 = moments_from_ensemble(&rec_samples, &rule, n_moments).unwrap();
        for (a, b) in m.as_slice().iter().zip(m2.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruction_is_linear_and_handles_constant_block() {
        let sp = spec(3);
        let mut m = MomentState::zeros(4, &sp);
        let base = random_state(sp.levels(), 1);
        let sqrt2 = 2.0_f64.sqrt();
        for (i, v) in base.values.iter().enumerate() {
            m.block_mut(0)[i] = sqrt2 * v;
        }
        for x in [-1.0, -0.3, 0.0, 0.72, 1.0] {
            let rec = ensemble_from_moments(&m, x);
            for (a, b) in rec.values.iter().zip(&base.values) {
                assert!((a - b).abs() < 1e-13);
            }
        }
        let m2 = MomentState::from_flat(
            m.as_slice().iter().map(|v| 2.0 * v).collect(),
            4,
            &sp,
        )
        .unwrap();
        let at = 0.4;
        let sum = ensemble_from_moments(&m2, at);
        let one = ensemble_from_moments(&m, at);
        for (a, b) in sum.values.iter().zip(&one.values) {
            assert!((a - 3.0 * b).abs() > 0.0 || true);
            assert!((a - 2.0 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn transform_rejects_node_sample_mismatch() {
        let sp = spec(2);
        let rule = QuadratureRule::gauss_legendre(8);
        let samples = alloc::vec![RealState::rest(&sp); 7];
        assert!(matches!(
            moments_from_ensemble(&samples, &rule, 4),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn generator_with_zero_omega_is_block_diagonal() {
        let sp = spec(2);
        let m = build_moment_generator(0.0, 0.1, 3, &sp).unwrap();
        // Off-diagonal moment blocks must vanish.
        let w = sp.real_dim();
        for bi in 0..3 {
            for bj in 0..3 {
                if bi == bj {
                    continue;
                }
                for i in 0..w {
                    for j in 0..w {
                        assert_eq!(m[(bi * w + i, bj * w + j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn generator_with_zero_delta_is_nominal_copies() {
        let sp = spec(2);
        let m = build_moment_generator(3.0, 0.0, 3, &sp).unwrap();
        let single = real_embed_generator(&build_coupling_matrix(1.0, 3.0, &sp).to_dense()).unwrap();
        let w = sp.real_dim();
        for b in 0..3 {
            for i in 0..w {
                for j in 0..w {
                    assert_eq!(m[(b * w + i, b * w + j)], single[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn generator_is_skew_symmetric() {
        let sp = spec(2);
        let m = build_moment_generator(2.0, 0.1, 4, &sp).unwrap();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                assert_eq!(m[(i, j)], -m[(j, i)]);
            }
        }
    }

    #[test]
    fn generator_matches_kronecker_assembly() {
        // Independent dense route: I⊗A(1,Ω)⊗J + 𝒞⊗(A(δ,Ω)−A(δ,0))⊗J.
        let sp = spec(2);
        let (omega, delta, n_m) = (2.7, 0.23, 4);
        let fast = build_moment_generator(omega, delta, n_m, &sp).unwrap();
        let j = Mat::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let a1 = build_coupling_matrix(1.0, omega, &sp).to_dense();
        let mut disp = build_coupling_matrix(delta, omega, &sp).to_dense();
        disp.add_scaled(&build_coupling_matrix(delta, 0.0, &sp).to_dense(), -1.0);
        let c = crate::legendre::coupling_tridiagonal(n_m).unwrap();
        let mut dense = Mat::identity(n_m).kron(&a1.kron(&j));
        dense.add_scaled(&c.kron(&disp.kron(&j)), 1.0);
        assert_eq!(fast.rows(), dense.rows());
        for i in 0..dense.rows() {
            for jx in 0..dense.cols() {
                assert!((fast[(i, jx)] - dense[(i, jx)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn generator_guards_dimension() {
        let sp = spec(24);
        assert!(matches!(
            build_moment_generator(1.0, 0.1, 100, &sp),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn node_basis_is_orthogonal_and_consistent() {
        let nb = NodeBasis::new(12);
        let vt_v = nb.v.transpose().mul(&nb.v);
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((vt_v[(i, j)] - expect).abs() < 1e-12);
            }
        }
        // Eigenvalues are the Gauss nodes.
        let rule = QuadratureRule::gauss_legendre(12);
        for (a, b) in nb.x.iter().zip(&rule.nodes) {
            assert!((a - b).abs() < 1e-12);
        }
        // Rest moments map to √w_j-weighted rest states per node.
        let sp = spec(3);
        let m0 = MomentState::initial_rest(12, &sp);
        let nodes = nb.to_nodes(&m0);
        let w = sp.real_dim();
        for j in 0..12 {
            let block = &nodes[j * w..(j + 1) * w];
            let weight = rule.weights[j];
            assert!((block[0].abs() - weight.sqrt()).abs() < 1e-10);
            assert!(block[1..].iter().all(|&v| v.abs() < 1e-12));
        }
        // Round trip.
        let back = nb.from_nodes(&nodes, &sp);
        for (a, b) in back.as_slice().iter().zip(m0.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_isometry_for_resolved_ensemble() {
        // Unit-norm ensemble propagated under a smooth envelope stays within
        // the first 20 moments to far below the tolerance.
        let sp = spec(5);
        let delta = 0.1;
        let rule = QuadratureRule::gauss_legendre(64);
        let env = PulseEnvelope::from_fn(0.01, 100, |t| 2.5 + t.sin()).unwrap();
        let samples: alloc::vec::Vec<RealState> = rule
            .nodes
            .iter()
            .map(|&xs| {
                propagate_terminal(&RealState::rest(&sp), &env, 1.0 + delta * xs, &sp).unwrap()
            })
            .collect();
        let m = moments_from_ensemble(&samples, &rule, 20).unwrap();
        let total: f64 = (0..20).map(|k| m.block(k).iter().map(|v| v * v).sum::<f64>()).sum();
        assert!((total - 2.0).abs() < 1e-8, "Parseval sum {total}");
    }
}
