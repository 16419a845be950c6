//! Versioned JSON run configuration. Every field has a default matching the
//! standard experiment setup, so a partial file (or `{}`) is valid; unknown
//! keys are rejected.

use anyhow::{bail, Context, Result};
use becsplit_core::ocp::{InitialGuess, OcpConfig};
use becsplit_core::rne::TruncationSpec;
use becsplit_core::square::{SquareBounds, SquareDesignOptions};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub version: u32,
    pub model: ModelConfig,
    pub target: TargetConfig,
    pub ocp: OcpSection,
    pub square: SquareSection,
    pub evaluation: EvaluationSection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            model: ModelConfig::default(),
            target: TargetConfig::default(),
            ocp: OcpSection::default(),
            square: SquareSection::default(),
            evaluation: EvaluationSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Moment truncation order N.
    pub n_moments: usize,
    /// Momentum truncation during design.
    pub n_plus: usize,
    /// Momentum truncation for validation simulations.
    pub n_plus_val: usize,
    /// Ensemble half-width δ.
    pub delta: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { n_moments: 20, n_plus: 9, n_plus_val: 24, delta: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetConfig {
    /// Target diffraction level n.
    pub n: usize,
}

impl Default for TargetConfig {
    fn default() -> Self {
        TargetConfig { n: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OcpSection {
    pub horizon: f64,
    pub dt: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub slew_min: f64,
    pub slew_max: f64,
    pub lambda: f64,
    pub lambda_floor: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub initial_guess: GuessConfig,
    pub qp_tol: f64,
    pub qp_max_iters: usize,
    pub control_stride: usize,
    pub stall_window: usize,
    pub stall_rel: f64,
}

impl Default for OcpSection {
    fn default() -> Self {
        let std = OcpConfig::standard(1, 0.1);
        OcpSection {
            horizon: std.horizon,
            dt: std.dt,
            omega_min: std.omega_min,
            omega_max: std.omega_max,
            slew_min: std.slew_min,
            slew_max: std.slew_max,
            lambda: std.lambda,
            lambda_floor: std.lambda_floor,
            tolerance: std.tolerance,
            max_iters: std.max_iters,
            initial_guess: GuessConfig::default(),
            qp_tol: std.qp_tol,
            qp_max_iters: std.qp_max_iters,
            control_stride: std.control_stride,
            stall_window: std.stall_window,
            stall_rel: std.stall_rel,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct GuessConfig {
    pub kind: GuessKind,
    pub offset: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum GuessKind {
    OffsetSine,
    Constant,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig { kind: GuessKind::OffsetSine, offset: 2.5, amplitude: 1.0 }
    }
}

impl GuessConfig {
    pub fn to_core(&self) -> InitialGuess {
        match self.kind {
            GuessKind::OffsetSine => {
                InitialGuess::OffsetSine { offset: self.offset, amplitude: self.amplitude }
            }
            GuessKind::Constant => InitialGuess::Constant(self.offset),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SquareSection {
    pub omega_max: f64,
    pub tau_max: f64,
    pub restarts: usize,
    /// Number of ε samples in the design objective (1 = nominal design).
    pub m: usize,
    pub seed: u64,
    /// Designs with a best objective above this value are reported as
    /// failures; `null` disables the check.
    pub success_threshold: Option<f64>,
}

impl Default for SquareSection {
    fn default() -> Self {
        let opts = SquareDesignOptions::default();
        SquareSection {
            omega_max: opts.bounds.omega_max,
            tau_max: opts.bounds.tau_max,
            restarts: opts.restarts,
            m: 1,
            seed: opts.seed,
            success_threshold: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationSection {
    pub quadrature_nodes: usize,
    pub curve_points: usize,
}

impl Default for EvaluationSection {
    fn default() -> Self {
        EvaluationSection { quadrature_nodes: 64, curve_points: 41 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub cases: Vec<SweepCase>,
    pub methods: Vec<Method>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            cases: vec![SweepCase { n: 1, delta: 0.1 }],
            methods: vec![
                Method::Sp,
                Method::Sp3,
                Method::Sp10,
                Method::MdPositive,
                Method::MdReal,
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCase {
    pub n: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Nominal square pulse (m = 1).
    Sp,
    /// Sampled square pulse with 3 samples.
    Sp3,
    /// Sampled square pulse with 10 samples.
    Sp10,
    /// Moment design with non-negative control.
    MdPositive,
    /// Moment design with sign-free control.
    MdReal,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Sp => "sp",
            Method::Sp3 => "sp3",
            Method::Sp10 => "sp10",
            Method::MdPositive => "md-positive",
            Method::MdReal => "md-real",
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let config = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("cannot parse config {}", p.display()))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {})", self.version, CONFIG_VERSION);
        }
        if self.target.n > self.model.n_plus {
            bail!(
                "target level n = {} exceeds the design truncation N+ = {}",
                self.target.n,
                self.model.n_plus
            );
        }
        if self.target.n > self.model.n_plus_val {
            bail!(
                "target level n = {} exceeds the validation truncation N+ = {}",
                self.target.n,
                self.model.n_plus_val
            );
        }
        // The core validators cover the rest; build them once here.
        self.ocp_config()?;
        TruncationSpec::new(self.model.n_plus_val)
            .map_err(|e| anyhow::anyhow!("invalid validation truncation: {e}"))?;
        if self.evaluation.quadrature_nodes == 0 {
            bail!("evaluation needs at least one quadrature node");
        }
        if self.evaluation.curve_points < 2 {
            bail!("fidelity curves need at least two points");
        }
        Ok(())
    }

    /// Assemble the core design configuration for (target.n, model.delta).
    pub fn ocp_config(&self) -> Result<OcpConfig> {
        self.ocp_config_for(self.target.n, self.model.delta, self.ocp.omega_min)
    }

    pub fn ocp_config_for(&self, n: usize, delta: f64, omega_min: f64) -> Result<OcpConfig> {
        let spec = TruncationSpec::new(self.model.n_plus)
            .map_err(|e| anyhow::anyhow!("invalid design truncation: {e}"))?;
        let cfg = OcpConfig {
            target_level: n,
            delta,
            n_moments: self.model.n_moments,
            spec,
            horizon: self.ocp.horizon,
            dt: self.ocp.dt,
            omega_min,
            omega_max: self.ocp.omega_max,
            slew_min: self.ocp.slew_min,
            slew_max: self.ocp.slew_max,
            lambda: self.ocp.lambda,
            lambda_floor: self.ocp.lambda_floor,
            tolerance: self.ocp.tolerance,
            max_iters: self.ocp.max_iters,
            initial_guess: self.ocp.initial_guess.to_core(),
            qp_tol: self.ocp.qp_tol,
            qp_max_iters: self.ocp.qp_max_iters,
            control_stride: self.ocp.control_stride,
            stall_window: self.ocp.stall_window,
            stall_rel: self.ocp.stall_rel,
        };
        cfg.validate().map_err(|e| anyhow::anyhow!("invalid design settings: {e}"))?;
        Ok(cfg)
    }

    pub fn square_options(&self, m: usize, seed: u64) -> (SquareDesignOptions, usize) {
        let opts = SquareDesignOptions {
            bounds: SquareBounds {
                omega_max: self.square.omega_max,
                tau_max: self.square.tau_max,
            },
            restarts: self.square.restarts,
            seed,
            success_threshold: self.square.success_threshold.unwrap_or(f64::INFINITY),
            extra_starts: Vec::new(),
        };
        (opts, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default_config() {
        let cfg: RunConfig = serde_json::from_str("{}").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.model.n_moments, 20);
        assert_eq!(cfg.ocp.omega_max, 100.0);
        assert_eq!(cfg.square.restarts, 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"modell": {}}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<RunConfig>(r#"{"model": {"n_plusx": 3}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn invariant_violations_are_reported() {
        let mut cfg = RunConfig::default();
        cfg.target.n = 10;
        cfg.model.n_plus = 9;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("exceeds the design truncation"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&cfg).unwrap());
    }
}
