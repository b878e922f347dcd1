//! Run configuration: defaults, an optional `key = value` file, then flags.
//!
//! A configuration file is TOML with any of these keys:
//!
//! ```toml
//! kappa = 0.01
//! noise_p = 0.0437
//! shots = 10000
//! seed = 7
//! grid_resolution = 2000000
//! circuit = "ms"
//! ```
//!
//! Flags given on the command line win over the file.

use std::path::Path;

use clap::ValueEnum;
use epistemic_core::ontic::DEFAULT_RESOLUTION;
use epistemic_core::protocol::{MeasurementCircuit, MAX_KAPPA};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Circuit {
    Hcz,
    Ms,
}

impl From<Circuit> for MeasurementCircuit {
    fn from(c: Circuit) -> Self {
        match c {
            Circuit::Hcz => MeasurementCircuit::Hcz,
            Circuit::Ms => MeasurementCircuit::Ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub kappa: f64,
    /// `None` lets `simulate` calibrate; other commands read it as 0.
    pub noise_p: Option<f64>,
    pub shots: u64,
    pub seed: u64,
    pub grid_resolution: usize,
    pub circuit: Circuit,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kappa: 0.01,
            noise_p: None,
            shots: 10_000,
            seed: 0,
            grid_resolution: DEFAULT_RESOLUTION,
            circuit: Circuit::Hcz,
        }
    }
}

/// Every field optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub kappa: Option<f64>,
    pub noise_p: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    #[serde(alias = "grid")]
    pub grid_resolution: Option<usize>,
    pub circuit: Option<Circuit>,
}

impl PartialConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// `self` over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            kappa: self.kappa.unwrap_or(base.kappa),
            noise_p: self.noise_p.or(base.noise_p),
            shots: self.shots.unwrap_or(base.shots),
            seed: self.seed.unwrap_or(base.seed),
            grid_resolution: self.grid_resolution.unwrap_or(base.grid_resolution),
            circuit: self.circuit.unwrap_or(base.circuit),
        }
    }
}

impl RunConfig {
    pub fn validate(self) -> Result<Self, CliError> {
        if !(0.0..=MAX_KAPPA).contains(&self.kappa) {
            return Err(CliError::Config(format!(
                "kappa = {} outside [0, {MAX_KAPPA}]",
                self.kappa
            )));
        }
        if let Some(p) = self.noise_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::Config(format!("noise_p = {p} outside [0, 1]")));
            }
        }
        if self.shots == 0 {
            return Err(CliError::Config("shots must be at least 1".into()));
        }
        if self.grid_resolution == 0 {
            return Err(CliError::Config(
                "grid resolution must be at least 1".into(),
            ));
        }
        Ok(self)
    }

    pub fn noise_or_zero(&self) -> f64 {
        self.noise_p.unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let file =
            PartialConfig::from_toml("kappa = 0.02\nshots = 50\ncircuit = \"ms\"\n").unwrap();
        let cfg = file.over(RunConfig::default());
        assert_eq!(cfg.kappa, 0.02);
        assert_eq!(cfg.shots, 50);
        assert_eq!(cfg.circuit, Circuit::Ms);
        assert_eq!(cfg.seed, 0);
        let flags = PartialConfig {
            shots: Some(7),
            ..Default::default()
        };
        assert_eq!(flags.over(cfg).shots, 7);
    }

    #[test]
    fn grid_alias() {
        let file = PartialConfig::from_toml("grid = 1000").unwrap();
        assert_eq!(file.grid_resolution, Some(1000));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PartialConfig::from_toml("kapa = 0.1").is_err());
        assert!(PartialConfig::from_toml("kappa = \"x\"").is_err());
        assert!(PartialConfig::from_toml("circuit = \"cz\"").is_err());
        let bad = |f: fn(&mut RunConfig)| {
            let mut c = RunConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.kappa = -0.1));
        assert!(bad(|c| c.kappa = 0.6));
        assert!(bad(|c| c.kappa = f64::NAN));
        assert!(bad(|c| c.noise_p = Some(1.5)));
        assert!(bad(|c| c.shots = 0));
        assert!(bad(|c| c.grid_resolution = 0));
        assert!(RunConfig::default().validate().is_ok());
    }
}
