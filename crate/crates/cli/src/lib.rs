//! Library side of the `epistemic` command-line tool.
//!
//! Every command prints one JSON document (`schema: 1`) carrying the tool
//! version, the seed and the full resolved configuration next to its result,
//! so a saved output file is enough to rerun it. Exit codes: 0 success,
//! 2 the forbidden-outcome pattern is broken, 3 bad configuration or input.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::{Circuit, Format, PartialConfig, RunConfig};

pub const SCHEMA: u32 = 1;

pub const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "+",
    env!("EPISTEMIC_GIT_DESCRIBE")
);

pub const EXIT_PROTOCOL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Parser)]
#[command(name = "epistemic", version = VERSION, about = "Two-ion overlap test simulator and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Crosstalk fraction on the neighbouring ion.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Depolarizing strength before measurement.
    #[arg(long, global = true)]
    pub noise_p: Option<f64>,
    /// Shots per input.
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sphere quadrature nodes.
    #[arg(long = "grid", global = true)]
    pub grid_resolution: Option<usize>,
    #[arg(long, value_enum, global = true)]
    pub circuit: Option<Circuit>,
    /// TOML file of `key = value` settings; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability matrix, forbidden-outcome assignment and circuit equivalence.
    VerifyProtocol {
        /// Conditional phase of the hcz circuit (default pi).
        #[arg(long, value_parser = commands::parse_angle, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Single-qubit Z phase of the hcz circuit (default 0).
        #[arg(long, value_parser = commands::parse_angle, allow_negative_numbers = true)]
        beta: Option<f64>,
    },
    /// Smallest mean ε compatible with quantum-equal classical distances.
    Threshold,
    /// Sample shots, estimate ε and compare with the threshold.
    Simulate,
    /// Analyze given forbidden-outcome rates.
    Analyze {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        eps: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        err: Vec<f64>,
        #[arg(long)]
        mean_err_override: Option<f64>,
    },
    /// Classical vs quantum trace distance in the Kochen-Specker model.
    Ksmodel {
        /// Bloch angles in radians; `pi/4` style is accepted.
        #[arg(long, value_delimiter = ',', value_parser = commands::parse_angle, allow_negative_numbers = true)]
        angles: Option<Vec<f64>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyProtocol { .. } => "verify-protocol",
            Command::Threshold => "threshold",
            Command::Simulate => "simulate",
            Command::Analyze { .. } => "analyze",
            Command::Ksmodel { .. } => "ksmodel",
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a RunConfig,
    pub result: T,
}

/// What a command produced, before it is written anywhere.
#[derive(Debug)]
pub struct Output {
    pub json: String,
    pub csv: Option<String>,
    pub exit_code: i32,
    pub summary: String,
}

pub fn resolve_config(common: &CommonArgs) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(path) => PartialConfig::load(path)?,
        None => PartialConfig::default(),
    };
    let flags = PartialConfig {
        kappa: common.kappa,
        noise_p: common.noise_p,
        shots: common.shots,
        seed: common.seed,
        grid_resolution: common.grid_resolution,
        circuit: common.circuit,
    };
    flags.over(file.over(RunConfig::default())).validate()
}

fn envelope<T: Serialize>(command: &str, cfg: &RunConfig, result: T) -> Result<String, CliError> {
    let env = Envelope {
        schema: SCHEMA,
        command,
        version: VERSION,
        seed: cfg.seed,
        config: cfg,
        result,
    };
    serde_json::to_string_pretty(&env)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Output(e.to_string()))
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let cfg = resolve_config(&cli.common)?;
    let name = cli.command.name();
    if cli.common.format == Format::Csv && !matches!(cli.command, Command::Simulate) {
        return Err(CliError::Config(format!("{name} has no CSV output")));
    }
    let out = match &cli.command {
        Command::VerifyProtocol { alpha, beta } => {
            let phases = commands::Phases {
                alpha: *alpha,
                beta: *beta,
            };
            let r = commands::verify_protocol(&cfg, phases)?;
            let summary = format!(
                "pattern {}; max forbidden probability (ideal) {}; circuit TVD {:.3e}",
                if r.pattern_ok { "ok" } else { "BROKEN" },
                r.ideal.as_ref().map_or("n/a".to_string(), |v| format!(
                    "{:.3e}",
                    v.max_forbidden_probability
                )),
                r.circuit_equivalence_tvd
            );
            Output {
                exit_code: if r.pattern_ok { 0 } else { EXIT_PROTOCOL },
                json: envelope(name, &cfg, &r)?,
                csv: None,
                summary,
            }
        }
        Command::Threshold => {
            let r = commands::threshold(&cfg);
            Output {
                summary: format!(
                    "kappa {}: distance sum {:.6}, epsilon threshold {:.6}",
                    r.kappa, r.distance_sum, r.epsilon_threshold
                ),
                json: envelope(name, &cfg, &r)?,
                csv: None,
                exit_code: 0,
            }
        }
        Command::Simulate => {
            let r = commands::simulate(&cfg)?;
            let e = &r.analysis.epsilon;
            Output {
                summary: format!(
                    "mean epsilon {:.5} +- {:.5}, threshold {:.5}, sigma {}",
                    e.mean,
                    e.mean_err,
                    e.threshold,
                    e.sigma_distance
                        .map_or("n/a".to_string(), |s| format!("{s:.2}"))
                ),
                csv: Some(commands::simulate_csv(&r)?),
                json: envelope(name, &cfg, &r)?,
                exit_code: 0,
            }
        }
        Command::Analyze {
            eps,
            err,
            mean_err_override,
        } => {
            let r = commands::analyze_values(&cfg, eps, err, *mean_err_override)?;
            let e = &r.analysis.epsilon;
            Output {
                summary: format!(
                    "mean epsilon {:.5} +- {:.5}, threshold {:.5}, sigma {}, tail {}",
                    e.mean,
                    e.mean_err,
                    e.threshold,
                    e.sigma_distance
                        .map_or("n/a".to_string(), |s| format!("{s:.2}")),
                    e.tail_probability
                        .map_or("n/a".to_string(), |t| format!("{t:.3e}"))
                ),
                json: envelope(name, &cfg, &r)?,
                csv: None,
                exit_code: 0,
            }
        }
        Command::Ksmodel { angles } => {
            let angles = angles.as_deref().unwrap_or(&commands::DEFAULT_ANGLES);
            let r = commands::ksmodel(&cfg, angles)?;
            Output {
                summary: format!(
                    "{} angles, max |D_KS - D_Q| = {:.3e}",
                    r.rows.len(),
                    r.max_gap
                ),
                json: envelope(name, &cfg, &r)?,
                csv: None,
                exit_code: 0,
            }
        }
    };
    Ok(out)
}

fn write_to(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Writes the primary document to `--out` (or stdout). With `--out` in JSON
/// mode, `simulate` also leaves its CSV beside the JSON file.
pub fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    let primary = match cli.common.format {
        Format::Json => &out.json,
        Format::Csv => out.csv.as_ref().unwrap_or(&out.json),
    };
    match &cli.common.out {
        Some(path) => {
            write_to(path, primary)?;
            if cli.common.format == Format::Json {
                if let Some(csv) = &out.csv {
                    write_to(&path.with_extension("csv"), csv)?;
                }
            }
        }
        None => print!("{primary}"),
    }
    Ok(())
}
