//! Ensemble performance index and fidelity-versus-ε curves for comparing
//! control designs.
//!
//! The scalar index is I_e = ∫_{1−δ}^{1+δ} ‖|C_f⁺| − |C⁺(T, ε)|‖₂ dε,
//! evaluated by Gauss–Legendre quadrature mapped onto the ensemble interval.
//! Curves report the pointwise terminal error and the per-ε fidelity
//! 1 − error; the scalar index stays the integral.

use alloc::string::String;
use alloc::vec::Vec;

use crate::legendre::QuadratureRule;
use crate::rne::{propagate_terminal, PulseEnvelope, RealState};
use crate::square::{propagate_square_sequence, terminal_error_state, SquarePulseParams, TargetSpec};
use crate::Result;

/// A control design under evaluation: either five square-pulse parameters
/// (simulated by the exact three-exponential product) or a piecewise-
/// constant envelope (simulated on its own grid).
#[derive(Debug, Clone, PartialEq)]
pub struct ControlArtifact {
    pub label: String,
    pub payload: ControlPayload,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControlPayload {
    SquareParams(SquarePulseParams),
    Envelope(PulseEnvelope),
}

impl ControlArtifact {
    pub fn square(label: impl Into<String>, params: SquarePulseParams) -> Self {
        ControlArtifact { label: label.into(), payload: ControlPayload::SquareParams(params) }
    }

    pub fn envelope(label: impl Into<String>, envelope: PulseEnvelope) -> Self {
        ControlArtifact { label: label.into(), payload: ControlPayload::Envelope(envelope) }
    }

    /// Terminal error of the rendered control at inhomogeneity ε, simulated
    /// at the truncation carried by `target`.
    pub fn terminal_error(&self, eps: f64, target: &TargetSpec) -> Result<f64> {
        let spec = target.truncation();
        let state = match &self.payload {
            ControlPayload::SquareParams(params) => propagate_square_sequence(params, eps, &spec),
            ControlPayload::Envelope(env) => {
                propagate_terminal(&RealState::rest(&spec), env, eps, &spec)?
            }
        };
        Ok(terminal_error_state(&state, target))
    }
}

/// One point of a fidelity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    pub epsilon: f64,
    pub error: f64,
    /// Pointwise fidelity 1 − error.
    pub fidelity: f64,
}

/// Evaluation summary for one artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub label: String,
    /// The integral index I_e.
    pub index_value: f64,
    pub curve: Vec<CurvePoint>,
    /// Truncation used for validation simulations.
    pub n_plus_val: usize,
}

/// Quadrature evaluation of I_e over [1−δ, 1+δ]: the rule on [−1, 1] is
/// mapped affinely, picking up the Jacobian factor δ.
pub fn performance_index(
    artifact: &ControlArtifact,
    delta: f64,
    target: &TargetSpec,
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let eps = 1.0 + delta * x;
        acc += w * artifact.terminal_error(eps, target)?;
    }
    Ok(delta * acc)
}

/// Terminal error on a uniform ε-grid spanning [1−δ, 1+δ].
pub fn fidelity_curve(
    artifact: &ControlArtifact,
    delta: f64,
    target: &TargetSpec,
    n_points: usize,
) -> Result<Vec<CurvePoint>> {
    assert!(n_points >= 2, "a curve needs at least two points");
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let eps = 1.0 - delta + 2.0 * delta * i as f64 / (n_points - 1) as f64;
        let error = artifact.terminal_error(eps, target)?;
        out.push(CurvePoint { epsilon: eps, error, fidelity: 1.0 - error });
    }
    Ok(out)
}

/// Evaluate one artifact fully: index plus curve.
pub fn evaluate_artifact(
    artifact: &ControlArtifact,
    delta: f64,
    target: &TargetSpec,
    rule: &QuadratureRule,
    curve_points: usize,
) -> Result<EvaluationReport> {
    Ok(EvaluationReport {
        label: artifact.label.clone(),
        index_value: performance_index(artifact, delta, target, rule)?,
        curve: fidelity_curve(artifact, delta, target, curve_points)?,
        n_plus_val: target.truncation().n_plus(),
    })
}

/// One report row per artifact, in input order.
pub fn compare_report(
    artifacts: &[ControlArtifact],
    delta: f64,
    target: &TargetSpec,
    rule: &QuadratureRule,
    curve_points: usize,
) -> Result<Vec<EvaluationReport>> {
    artifacts
        .iter()
        .map(|a| evaluate_artifact(a, delta, target, rule, curve_points))
        .collect()
}
