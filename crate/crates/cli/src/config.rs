//! Experiment configuration: one strict JSON document per run.

use serde::{Deserialize, Serialize};

use lorentz::billiard::{Disk, ScattererConfig};
use lorentz::toy::DyadicSystem;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

/// The dynamical system behind the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Lorentz gas; the reference configuration when `disks` is omitted.
    Billiard {
        #[serde(default)]
        disks: Option<Vec<DiskSpec>>,
        #[serde(default)]
        tau_max_hint: Option<f64>,
        /// Collisions discarded after each exact `mu_1` draw.
        #[serde(default)]
        burn_in: usize,
    },
    /// Piecewise-constant observable of the doubling map.
    Dyadic { depth: u32, values: Vec<i64> },
    /// Simple symmetric random walk.
    Ssrw { dim: usize },
}

impl SystemSpec {
    pub fn scatterers(&self) -> Option<ScattererConfig> {
        match self {
            SystemSpec::Billiard {
                disks, tau_max_hint, ..
            } => {
                let reference = ScattererConfig::reference();
                let disks = match disks {
                    Some(d) => d.iter().map(|d| Disk::new(d.center[0], d.center[1], d.radius)).collect(),
                    None => reference.disks.clone(),
                };
                Some(ScattererConfig::new(disks, tau_max_hint.unwrap_or(reference.tau_max_hint)))
            }
            _ => None,
        }
    }

    pub fn dyadic(&self) -> Result<Option<DyadicSystem>, CliError> {
        match self {
            SystemSpec::Dyadic { depth, values } => DyadicSystem::new(*depth, values.clone())
                .map(Some)
                .map_err(|e| CliError::Validation(e.to_string())),
            _ => Ok(None),
        }
    }
}

/// Green–Kubo settings for billiard runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenKuboSpec {
    pub max_lag: usize,
    pub streams: u64,
    pub stream_length: usize,
    #[serde(default = "default_gk_burn_in")]
    pub burn_in: usize,
}

fn default_gk_burn_in() -> usize {
    1000
}

impl Default for GreenKuboSpec {
    fn default() -> Self {
        Self {
            max_lag: 40,
            streams: 16,
            stream_length: 625_000,
            burn_in: default_gk_burn_in(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub system: SystemSpec,
    /// Birkhoff lengths (`simulate`, `lclt`, `ssrw`) or recurrence horizons.
    #[serde(default)]
    pub n: Vec<usize>,
    /// Trajectories for Monte Carlo experiments.
    #[serde(default)]
    pub ensemble: Option<u64>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub green_kubo: Option<GreenKuboSpec>,
    /// `(m, n)` pairs for `joint`.
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    /// `t` grid for `spectral`.
    #[serde(default)]
    pub t_grid: Option<TGrid>,
    /// Scan resolution for `arithmetic`.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Lclt,
    Recurrence,
    Spectral,
    Arithmetic,
    Ssrw,
    Joint,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Lclt => "lclt",
            ExperimentKind::Recurrence => "recurrence",
            ExperimentKind::Spectral => "spectral",
            ExperimentKind::Arithmetic => "arithmetic",
            ExperimentKind::Ssrw => "ssrw",
            ExperimentKind::Joint => "joint",
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn ensemble(&self) -> Result<u64, CliError> {
        match self.ensemble {
            Some(e) if e > 0 => Ok(e),
            Some(_) => Err(CliError::Validation("ensemble must be positive".into())),
            None => Err(CliError::Validation(format!(
                "experiment {} needs an ensemble size",
                self.experiment.name()
            ))),
        }
    }

    /// Checks that hold for every experiment.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n.contains(&0) {
            return Err(CliError::Validation("all n values must be positive".into()));
        }
        for &(m, n) in &self.pairs {
            if m == 0 || m >= n {
                return Err(CliError::Validation(format!("pair ({m}, {n}) needs 0 < m < n")));
            }
        }
        if let SystemSpec::Ssrw { dim } = self.system {
            if dim != 1 && dim != 2 {
                return Err(CliError::Validation(format!("ssrw dim must be 1 or 2, got {dim}")));
            }
        }
        self.system.dyadic()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_ssrw_config() {
        let c = ExperimentConfig::parse(
            r#"{"experiment": "ssrw", "seed": 1, "system": {"kind": "ssrw", "dim": 2}, "n": [2, 4], "mode": "exact"}"#,
        )
        .unwrap();
        assert_eq!(c.experiment, ExperimentKind::Ssrw);
        assert_eq!(c.mode, Some(Mode::Exact));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        for text in [
            r#"{"experiment": "ssrw", "seed": 1, "system": {"kind": "ssrw", "dim": 2}, "bogus": 3}"#,
            r#"{"experiment": "ssrw", "seed": 1, "system": {"kind": "ssrw", "dim": 2, "bogus": 3}}"#,
            r#"{"experiment": "simulate", "seed": 1, "system": {"kind": "billiard", "disks": [{"center": [0, 0], "radius": 0.4, "bogus": 1}]}}"#,
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err().to_string();
            assert!(err.contains("bogus"), "{err}");
        }
    }

    #[test]
    fn seed_is_mandatory() {
        let err = ExperimentConfig::parse(r#"{"experiment": "ssrw", "system": {"kind": "ssrw", "dim": 2}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn billiard_defaults_to_reference() {
        let s = SystemSpec::Billiard {
            disks: None,
            tau_max_hint: None,
            burn_in: 0,
        };
        assert_eq!(s.scatterers().unwrap(), ScattererConfig::reference());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = ExperimentConfig::parse(
            r#"{"experiment": "lclt", "seed": 1, "system": {"kind": "dyadic", "depth": 2, "values": [1, 2, 3]}}"#,
        )
        .unwrap();
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        c.system = SystemSpec::Ssrw { dim: 2 };
        c.n = vec![0];
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
    }
}
