//! Optical pulse design for Bose–Einstein-condensate beam splitting that is
//! robust to a continuum of light-intensity inhomogeneities.
//!
//! The library covers the full pipeline:
//!
//! * [`rne`] — truncated Raman–Nath momentum-level dynamics for a single
//!   inhomogeneity value ε, with exact piecewise-constant propagation.
//! * [`square`] — the two-pulse square-sequence baselines, designed for the
//!   nominal system or for sampled values of ε.
//! * [`legendre`] — normalized Legendre polynomials, Gauss–Legendre
//!   quadrature, and the moment coupling matrix.
//! * [`moments`] — the Legendre moment lift of the ε-parameterized ensemble
//!   and the moment-space generator.
//! * [`ocp`] — iterative constrained pulse design in moment space: rollout,
//!   exact linearization, sensitivity assembly, and a damped QP update loop.
//! * [`qp`] — an operator-splitting solver for the strictly convex quadratic
//!   subproblems with amplitude and slew-rate constraints.
//! * [`eval`] — the ensemble performance index and fidelity-versus-ε curves
//!   used to compare control designs.
//!
//! All dynamics are nondimensionalized by the photon recoil frequency ω_r:
//! times are in units of 1/ω_r and amplitudes are Ω/ω_r, so published pulse
//! parameters can be used directly.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches scalar math to the platform intrinsics.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

use alloc::string::String;
use core::fmt;

pub mod eval;
pub mod legendre;
pub mod linalg;
mod math;
pub mod moments;
mod nelder_mead;
pub mod ocp;
pub mod qp;
pub mod rne;
pub mod square;

pub use eval::{compare_report, fidelity_curve, performance_index, ControlArtifact, EvaluationReport};
pub use legendre::{coupling_tridiagonal, legendre_normalized, recursion_coeff, EnsembleParameterMap, QuadratureRule};
pub use moments::{build_moment_generator, ensemble_from_moments, moments_from_ensemble, MomentState};
pub use ocp::{design_pulse, DesignResult, InitialGuess, OcpConfig, TargetMask};
pub use qp::{QpProblem, QpSolution, QpStatus};
pub use rne::{build_coupling_matrix, populations, propagate, real_embed_generator, step, LightShiftMatrix, PulseEnvelope, QuantumState, RealState, TruncationSpec};
pub use square::{optimize_square, propagate_square_sequence, sample_epsilons, sampled_objective, terminal_error, SampledEnsembleSpec, SquareDesign, SquareDesignOptions, SquarePulseParams, TargetSpec};

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix that must be symmetric is not.
    NotSymmetric,
    /// Two containers that must agree in length do not.
    DimensionMismatch { expected: usize, got: usize },
    /// An input violates a documented invariant; the message names it.
    Invalid(String),
    /// A requested assembly would exceed the configured dense-size limit.
    TooLarge { dim: usize, max: usize },
    /// No optimizer start reached the configured acceptance threshold.
    NoAcceptableStart { best: f64, threshold: f64 },
    /// The constraint set of a quadratic program admits no feasible point.
    Infeasible,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotSymmetric => write!(f, "matrix is not symmetric"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::TooLarge { dim, max } => {
                write!(f, "requested dimension {dim} exceeds limit {max}")
            }
            Error::NoAcceptableStart { best, threshold } => {
                write!(f, "no start reached threshold {threshold} (best objective {best})")
            }
            Error::Infeasible => write!(f, "constraint set is infeasible"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

#[cfg(test)]
pub(crate) mod testing {
    //! Shared oracles for unit tests: classical integrators kept independent
    //! of the exponential step maps they are used to check.

    use alloc::vec::Vec;

    use crate::linalg::Mat;

    /// Fixed-step RK4 for dv/dt = g·v with a constant generator.
    pub fn rk4_linear(g: &Mat, v0: &[f64], t: f64, dt: f64) -> Vec<f64> {
        let steps = (t / dt).round() as usize;
        let h = t / steps as f64;
        let mut v = v0.to_vec();
        for _ in 0..steps {
            let k1 = g.mul_vec(&v);
            let k2 = g.mul_vec(&axpy(&v, &k1, h / 2.0));
            let k3 = g.mul_vec(&axpy(&v, &k2, h / 2.0));
            let k4 = g.mul_vec(&axpy(&v, &k3, h));
            for i in 0..v.len() {
                v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        v
    }

    fn axpy(v: &[f64], k: &[f64], h: f64) -> Vec<f64> {
        v.iter().zip(k).map(|(a, b)| a + h * b).collect()
    }

    pub fn norm(v: &[f64]) -> f64 {
        crate::math::sqrt(v.iter().map(|x| x * x).sum())
    }
}
