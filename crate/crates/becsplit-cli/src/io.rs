//! File formats: CSV writers for envelopes, trajectories and curves, JSON
//! records for parameters and reports, and the artifact loader.
//!
//! Floats are printed with Rust's shortest round-trip formatting, so every
//! file reloads bit-exactly.

use anyhow::{bail, Context, Result};
use becsplit_core::eval::{ControlArtifact, CurvePoint};
use becsplit_core::rne::PulseEnvelope;
use becsplit_core::square::{SquareDesign, SquarePulseParams};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Flat square-pulse record mirroring the published parameter tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareParamsRecord {
    pub n: usize,
    pub delta: f64,
    pub m: usize,
    pub omega1: f64,
    pub omega2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub objective: f64,
}

impl SquareParamsRecord {
    pub fn new(n: usize, delta: f64, m: usize, design: &SquareDesign) -> Self {
        SquareParamsRecord {
            n,
            delta,
            m,
            omega1: design.params.omega1,
            omega2: design.params.omega2,
            tau1: design.params.tau1,
            tau2: design.params.tau2,
            tau3: design.params.tau3,
            objective: design.objective,
        }
    }

    pub fn params(&self) -> SquarePulseParams {
        SquarePulseParams {
            omega1: self.omega1,
            omega2: self.omega2,
            tau1: self.tau1,
            tau2: self.tau2,
            tau3: self.tau3,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_envelope_csv(path: &Path, envelope: &PulseEnvelope) -> Result<()> {
    let mut out = String::from("t,omega\n");
    for (k, v) in envelope.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k as f64 * envelope.dt, v));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn read_envelope_csv(path: &Path) -> Result<PulseEnvelope> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "t,omega" {
                bail!("{}: expected header 't,omega'", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let t: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .with_context(|| format!("{}:{}: bad time value", path.display(), lineno + 1))?;
        let v: f64 = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .with_context(|| format!("{}:{}: bad amplitude value", path.display(), lineno + 1))?;
        times.push(t);
        values.push(v);
    }
    if values.len() < 2 {
        bail!("{}: envelope needs at least two samples", path.display());
    }
    let dt = times[1] - times[0];
    for (k, &t) in times.iter().enumerate() {
        if (t - k as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
            bail!("{}: time grid is not uniform", path.display());
        }
    }
    PulseEnvelope::new(dt, values).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

pub fn write_trajectory_csv(path: &Path, dt: f64, populations: &[Vec<f64>]) -> Result<()> {
    let levels = populations.first().map_or(0, Vec::len);
    let mut header = String::from("t");
    for j in 0..levels {
        header.push_str(&format!(",p{}", 2 * j));
    }
    header.push('\n');
    let mut out = header;
    for (k, pops) in populations.iter().enumerate() {
        out.push_str(&format!("{}", k as f64 * dt));
        for p in pops {
            out.push_str(&format!(",{}", p));
        }
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut out = String::from("epsilon,error,fidelity\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.epsilon, p.error, p.fidelity));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_moments_csv(path: &Path, m: &becsplit_core::moments::MomentState) -> Result<()> {
    let mut out = String::from("block,level,re,im\n");
    for k in 0..m.n_moments() {
        let block = m.block(k);
        for level in 0..m.levels() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                k,
                level,
                block[2 * level],
                block[2 * level + 1]
            ));
        }
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_residuals_csv(path: &Path, residuals: &[f64]) -> Result<()> {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i, r));
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Load a control artifact: square-parameter JSON or envelope CSV, selected
/// by extension. The label is the file stem.
pub fn load_artifact(path: &Path) -> Result<ControlArtifact> {
    let label = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("artifact")
        .to_string();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let record: SquareParamsRecord = serde_json::from_str(&text)
                .with_context(|| format!("cannot parse {}", path.display()))?;
            Ok(ControlArtifact::square(label, record.params()))
        }
        Some("csv") => Ok(ControlArtifact::envelope(label, read_envelope_csv(path)?)),
        _ => bail!("{}: unknown artifact format (expected .json or .csv)", path.display()),
    }
}

/// A run directory: config snapshot, results, and a plain-text log. The log
/// is the only place wall-clock information goes, keeping every JSON and CSV
/// output byte-reproducible.
pub struct RunDir {
    root: PathBuf,
    log: fs::File,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))?;
        let log = fs::File::create(root.join("run.log"))
            .with_context(|| format!("cannot create log in {}", root.display()))?;
        Ok(RunDir { root: root.to_path_buf(), log })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf> {
        let dir = self.root.join(name);
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }

    pub fn log(&mut self, message: &str) {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let _ = writeln!(self.log, "[{stamp:.3}] {message}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_csv_round_trips_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("env.csv");
        let env = PulseEnvelope::from_fn(0.001, 137, |t| 2.5 + (31.7 * t).sin() / 3.0).unwrap();
        write_envelope_csv(&path, &env).unwrap();
        let back = read_envelope_csv(&path).unwrap();
        assert_eq!(back.dt, env.dt);
        assert_eq!(back.values, env.values);
    }

    #[test]
    fn square_record_round_trips_losslessly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.json");
        let design = SquareDesign {
            params: SquarePulseParams {
                omega1: 3.9865,
                omega2: 2.2849,
                tau1: 0.4744,
                tau2: 0.9427,
                tau3: 0.4181,
            },
            objective: 1.234e-3,
        };
        let record = SquareParamsRecord::new(1, 0.1, 1, &design);
        write_json(&path, &record).unwrap();
        let artifact = load_artifact(&path).unwrap();
        match artifact.payload {
            becsplit_core::eval::ControlPayload::SquareParams(p) => {
                assert_eq!(p, design.params)
            }
            _ => panic!("expected square params"),
        }
    }

    #[test]
    fn nonuniform_envelope_grid_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "t,omega\n0,1\n0.1,2\n0.3,3\n").unwrap();
        assert!(read_envelope_csv(&path).is_err());
    }
}
