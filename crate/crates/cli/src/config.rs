//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vnag_core::{BregmanParams, DampingSchedule, PerturbationSpec, Potential};

use crate::error::{CliError, Result};

pub const DEFAULT_N_STEPS: usize = 4000;

/// One JSON document describing a run. Every field is optional at parse time;
/// each subcommand checks for the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingSchedule>,
    /// Integrate the Bregman flow of the polynomial family instead of a
    /// damping schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bregman: Option<BregmanPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub perturbations: Vec<PerturbationSpec>,
    #[serde(default, skip_serializing_if = "Sweep::is_empty")]
    pub sweep: Sweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BregmanPreset {
    pub p: f64,
    #[serde(default = "quarter")]
    pub scale: f64,
}

fn quarter() -> f64 {
    0.25
}

impl BregmanPreset {
    pub fn params(&self) -> Result<BregmanParams> {
        Ok(BregmanParams::polynomial(self.p, self.scale)?)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<u32>,
    /// Interval lengths measured from `t1`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub length: Vec<f64>,
}

impl Sweep {
    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
            && self.alpha.is_empty()
            && self.eps.is_empty()
            && self.c.is_empty()
            && self.sigma.is_empty()
            && self.k.is_empty()
            && self.length.is_empty()
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn require_potential(&self) -> Result<&Potential> {
        self.potential
            .as_ref()
            .ok_or_else(|| CliError::config("missing field `potential`"))
    }

    pub fn require_interval(&self) -> Result<(f64, f64)> {
        let [t1, t2] = self
            .interval
            .ok_or_else(|| CliError::config("missing field `interval`"))?;
        if !(t1.is_finite() && t2.is_finite() && t1 < t2) {
            return Err(CliError::config(format!("interval [{t1}, {t2}] must satisfy t1 < t2")));
        }
        Ok((t1, t2))
    }

    pub fn damping_or_default(&self) -> DampingSchedule {
        self.damping.unwrap_or_else(DampingSchedule::nesterov)
    }

    pub fn n_steps_or_default(&self) -> usize {
        self.n_steps.unwrap_or(DEFAULT_N_STEPS)
    }

    /// `x0` defaults to all ones, `v0` to zero.
    pub fn initial_state(&self, dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let x0 = self.x0.clone().unwrap_or_else(|| vec![1.0; dim]);
        let v0 = self.v0.clone().unwrap_or_else(|| vec![0.0; dim]);
        if x0.len() != dim || v0.len() != dim {
            return Err(CliError::config(format!(
                "x0/v0 have lengths {}/{}, potential has dimension {dim}",
                x0.len(),
                v0.len()
            )));
        }
        Ok((x0, v0))
    }

    /// Potentials to run: one `βx²/2` per swept β, else the configured one.
    pub fn potentials(&self) -> Result<Vec<Potential>> {
        if self.sweep.beta.is_empty() {
            return Ok(vec![self.require_potential()?.clone()]);
        }
        if self.potential.is_some() {
            return Err(CliError::config("give either `potential` or `sweep.beta`, not both"));
        }
        self.sweep
            .beta
            .iter()
            .map(|&b| Potential::scalar_quadratic(b).map_err(CliError::from))
            .collect()
    }

    /// Dampings to run: one constant damping per swept α, else the configured one.
    pub fn dampings(&self) -> Result<Vec<DampingSchedule>> {
        if self.sweep.alpha.is_empty() {
            return Ok(vec![self.damping_or_default()]);
        }
        if self.damping.is_some() {
            return Err(CliError::config("give either `damping` or `sweep.alpha`, not both"));
        }
        self.sweep
            .alpha
            .iter()
            .map(|&a| DampingSchedule::constant(a).map_err(CliError::from))
            .collect()
    }

    /// Intervals to run: `[t1, t1 + L]` per swept length, else the configured one.
    pub fn intervals(&self) -> Result<Vec<(f64, f64)>> {
        if self.sweep.length.is_empty() {
            return Ok(vec![self.require_interval()?]);
        }
        let [t1, _] = self
            .interval
            .ok_or_else(|| CliError::config("`sweep.length` needs `interval` for t1"))?;
        self.sweep
            .length
            .iter()
            .map(|&l| {
                if l.is_finite() && l > 0.0 {
                    Ok((t1, t1 + l))
                } else {
                    Err(CliError::config(format!("interval length must be positive, got {l}")))
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let cfg = ExperimentConfig::from_json(
            r#"{
                "experiment": "demo",
                "potential": {"kind": "quadratic", "eigenvalues": [1.0], "xstar": [0.0]},
                "damping": {"kind": "vanishing", "c": 3},
                "interval": [0.5, 3.5],
                "perturbations": [{"kind": "triangle", "c": 2, "eps": 1, "sigma": 2}],
                "sweep": {"eps": [0.5, 1.0], "k": [1, 2]},
                "seed": 7
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.require_interval().unwrap(), (0.5, 3.5));
        assert_eq!(cfg.perturbations[0].sigma, 2.0);
        assert_eq!(cfg.sweep.k, vec![1, 2]);
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"interval": [0, 1], "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"gamma": [1]}}"#).is_err());
        assert!(ExperimentConfig::from_json(
            r#"{"potential": {"kind": "quadratic", "eigenvalues": [1], "extra": 0}}"#
        )
        .is_err());
    }

    #[test]
    fn rejects_invalid_constructs() {
        let bad = [
            r#"{"potential": {"kind": "quadratic", "eigenvalues": [-1]}}"#,
            r#"{"damping": {"kind": "constant", "alpha": -1}}"#,
            r#"{"perturbations": [{"kind": "sinusoid", "k": 0}]}"#,
        ];
        for text in bad {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
        let cfg = ExperimentConfig::from_json(r#"{"interval": [2, 1]}"#).unwrap();
        assert!(cfg.require_interval().is_err());
    }

    #[test]
    fn sweeps_expand() {
        let cfg = ExperimentConfig::from_json(
            r#"{"interval": [1, 2], "sweep": {"beta": [1, 10], "alpha": [0.5], "length": [1.9, 2.1]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.potentials().unwrap().len(), 2);
        assert_eq!(cfg.dampings().unwrap(), vec![DampingSchedule::Constant { alpha: 0.5 }]);
        assert_eq!(cfg.intervals().unwrap(), vec![(1.0, 2.9), (1.0, 3.1)]);
    }
}
