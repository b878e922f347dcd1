//! The five subcommands as plain functions over a validated [`RunConfig`].

use std::f64::consts::PI;

use epistemic_core::bounds::{epsilon_threshold, QuantumDistances};
use epistemic_core::experiment::{
    analyze, calibrate_noise, estimate_epsilons, fill_degenerate_errors, simulate_run, Analysis,
};
use epistemic_core::ontic::{ks_distance_at_angle, SphereGrid};
use epistemic_core::protocol::{
    assignment_for, circuit_equivalence_tvd, forbidden_probabilities, measurement_circuit,
    prepare_input, probability_matrix, probability_matrix_for, CrosstalkConfig, MeasurementCircuit,
    PreparationLabel, ProbabilityMatrix, ProtocolError, OUTCOME_LABELS, ZERO_TOLERANCE,
};
use epistemic_core::quantum::{born_probabilities, quantum_trace_distance, PureState};
use serde::Serialize;

use crate::config::{Circuit, RunConfig};
use crate::CliError;

/// Mean forbidden-outcome rate `simulate` calibrates to when no noise is given.
pub const CALIBRATION_TARGET: f64 = 0.011;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixView {
    pub kappa: f64,
    pub noise_p: f64,
    /// Rows in preparation order, columns `11, 10, 01, 00`.
    pub rows: Vec<RowView>,
    pub forbidden_probabilities: [f64; 4],
    pub max_forbidden_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowView {
    pub input: &'static str,
    pub probabilities: [f64; 4],
    pub forbidden_outcome: &'static str,
}

impl MatrixView {
    fn new(m: &ProbabilityMatrix, kappa: f64, noise_p: f64) -> Self {
        let forbidden = forbidden_probabilities(m);
        Self {
            kappa,
            noise_p,
            rows: PreparationLabel::ALL
                .iter()
                .map(|&l| RowView {
                    input: l.name(),
                    probabilities: *m.row(l),
                    forbidden_outcome: OUTCOME_LABELS[m.assignment().column(l)],
                })
                .collect(),
            forbidden_probabilities: forbidden,
            max_forbidden_probability: forbidden.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Phases of the H/CZ measurement family `(H⊗H)·R_α·(Z_β⊗Z_β)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Phases {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub pattern_ok: bool,
    /// `None` for the native circuit.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// Forbidden outcome for each input.
    pub assignment: Option<[&'static str; 4]>,
    /// Outcomes of zero probability per input at κ = 0, noise 0.
    pub zero_cells: Vec<Vec<&'static str>>,
    pub ideal: Option<MatrixView>,
    pub configured: Option<MatrixView>,
    pub circuit_equivalence_tvd: f64,
}

pub fn verify_protocol(cfg: &RunConfig, phases: Phases) -> Result<VerifyReport, CliError> {
    let crosstalk = CrosstalkConfig::new(cfg.kappa).map_err(config_err)?;
    let (u, alpha, beta) = match cfg.circuit {
        Circuit::Ms if phases.alpha.is_some() || phases.beta.is_some() => {
            return Err(CliError::Config(
                "--alpha/--beta apply to the hcz circuit only".into(),
            ))
        }
        Circuit::Ms => (MeasurementCircuit::Ms.unitary(), None, None),
        Circuit::Hcz => {
            let (a, b) = (phases.alpha.unwrap_or(PI), phases.beta.unwrap_or(0.0));
            if !a.is_finite() || !b.is_finite() {
                return Err(CliError::Config("phases must be finite".into()));
            }
            (measurement_circuit(a, b), Some(a), Some(b))
        }
    };
    let zero_cells = PreparationLabel::ALL
        .iter()
        .map(|&l| {
            let out = prepare_input(l, CrosstalkConfig::ideal())
                .apply(&u)
                .map_err(config_err)?;
            Ok(born_probabilities(&out)
                .iter()
                .zip(OUTCOME_LABELS)
                .filter(|(p, _)| **p < ZERO_TOLERANCE)
                .map(|(_, o)| o)
                .collect())
        })
        .collect::<Result<Vec<Vec<&'static str>>, CliError>>()?;
    let (ideal, configured, assignment) = match assignment_for(&u) {
        Ok(a) => {
            let noise = cfg.noise_or_zero();
            let ideal =
                probability_matrix_for(CrosstalkConfig::ideal(), 0.0, &u, a).map_err(config_err)?;
            let conf = probability_matrix_for(crosstalk, noise, &u, a).map_err(config_err)?;
            (
                Some(MatrixView::new(&ideal, 0.0, 0.0)),
                Some(MatrixView::new(&conf, cfg.kappa, noise)),
                Some(a.columns().map(|c| OUTCOME_LABELS[c])),
            )
        }
        Err(ProtocolError::NotBijection(_)) => (None, None, None),
        Err(e) => return Err(config_err(e)),
    };
    let pattern_ok = ideal
        .as_ref()
        .is_some_and(|v| v.max_forbidden_probability < ZERO_TOLERANCE);
    Ok(VerifyReport {
        pattern_ok,
        alpha,
        beta,
        assignment,
        zero_cells,
        ideal,
        configured,
        circuit_equivalence_tvd: circuit_equivalence_tvd(crosstalk),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub kappa: f64,
    pub distances: QuantumDistances,
    pub distance_sum: f64,
    pub epsilon_threshold: f64,
    /// The distance sum reached 1, so any ε is compatible.
    pub clamped: bool,
}

pub fn threshold(cfg: &RunConfig) -> ThresholdReport {
    let distances = QuantumDistances::at(cfg.kappa);
    let sum = distances.sum();
    ThresholdReport {
        kappa: cfg.kappa,
        distances,
        distance_sum: sum,
        epsilon_threshold: epsilon_threshold(cfg.kappa),
        clamped: sum >= 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordView {
    pub input: &'static str,
    pub shots: u64,
    pub counts: [u64; 4],
    pub frequencies: [f64; 4],
    pub forbidden_outcome: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub noise_p: f64,
    pub noise_p_calibrated: bool,
    pub calibration_target: Option<f64>,
    pub matrix: MatrixView,
    pub records: Vec<RecordView>,
    pub analysis: Analysis,
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateReport, CliError> {
    let circuit = MeasurementCircuit::from(cfg.circuit);
    let crosstalk = CrosstalkConfig::new(cfg.kappa).map_err(config_err)?;
    let (noise_p, calibrated) = match cfg.noise_p {
        Some(p) => (p, false),
        None => (
            calibrate_noise(crosstalk, circuit, CALIBRATION_TARGET).map_err(config_err)?,
            true,
        ),
    };
    let m = probability_matrix(crosstalk, noise_p, circuit).map_err(config_err)?;
    let records = simulate_run(&m, cfg.shots, cfg.seed).map_err(config_err)?;
    let est = estimate_epsilons(&records, m.assignment()).map_err(config_err)?;
    let analysis = analyze(est.eps, est.eps_err, cfg.kappa, None).map_err(config_err)?;
    Ok(SimulateReport {
        noise_p,
        noise_p_calibrated: calibrated,
        calibration_target: calibrated.then_some(CALIBRATION_TARGET),
        matrix: MatrixView::new(&m, cfg.kappa, noise_p),
        records: records
            .iter()
            .map(|r| RecordView {
                input: r.label.name(),
                shots: r.shots,
                counts: r.counts,
                frequencies: r.frequencies(),
                forbidden_outcome: OUTCOME_LABELS[m.assignment().column(r.label)],
            })
            .collect(),
        analysis,
    })
}

/// One line per (input, outcome), ready for a grouped bar chart.
pub fn simulate_csv(report: &SimulateReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "input",
        "outcome",
        "count",
        "shots",
        "frequency",
        "probability",
        "forbidden",
    ])
    .map_err(csv_err)?;
    for (rec, row) in report.records.iter().zip(&report.matrix.rows) {
        for (j, outcome) in OUTCOME_LABELS.iter().enumerate() {
            w.write_record([
                rec.input.to_string(),
                outcome.to_string(),
                rec.counts[j].to_string(),
                rec.shots.to_string(),
                rec.frequencies[j].to_string(),
                row.probabilities[j].to_string(),
                (*outcome == rec.forbidden_outcome).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub eps: [f64; 4],
    /// As supplied.
    pub eps_err: [f64; 4],
    /// After replacing zero errors on ε ∈ {0, 1} with the Wilson half-width.
    pub eps_err_used: [f64; 4],
    pub wilson_shots: u64,
    pub analysis: Analysis,
}

pub fn analyze_values(
    cfg: &RunConfig,
    eps: &[f64],
    err: &[f64],
    mean_err_override: Option<f64>,
) -> Result<AnalyzeReport, CliError> {
    let four = |name: &str, v: &[f64]| -> Result<[f64; 4], CliError> {
        v.try_into().map_err(|_| {
            CliError::Config(format!("--{name} needs exactly 4 values, got {}", v.len()))
        })
    };
    let eps = four("eps", eps)?;
    let err = four("err", err)?;
    let used = fill_degenerate_errors(eps, err, cfg.shots);
    let analysis = analyze(eps, used, cfg.kappa, mean_err_override).map_err(config_err)?;
    Ok(AnalyzeReport {
        eps,
        eps_err: err,
        eps_err_used: used,
        wilson_shots: cfg.shots,
        analysis,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsRow {
    pub theta: f64,
    pub d_ks: f64,
    pub d_q: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub grid_resolution: usize,
    pub rows: Vec<KsRow>,
    pub max_gap: f64,
}

pub const DEFAULT_ANGLES: [f64; 6] = [0.0, PI / 6.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI];

pub fn ksmodel(cfg: &RunConfig, angles: &[f64]) -> Result<KsReport, CliError> {
    let grid = SphereGrid::fibonacci(cfg.grid_resolution).map_err(config_err)?;
    let north = PureState::from_bloch([0.0, 0.0, 1.0]).map_err(config_err)?;
    let rows = angles
        .iter()
        .map(|&theta| {
            let other =
                PureState::from_bloch([theta.sin(), 0.0, theta.cos()]).map_err(config_err)?;
            let d_q = quantum_trace_distance(&north, &other).map_err(config_err)?;
            let d_ks = ks_distance_at_angle(theta, &grid).map_err(config_err)?;
            Ok(KsRow {
                theta,
                d_ks,
                d_q,
                gap: (d_ks - d_q).abs(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(KsReport {
        grid_resolution: grid.len(),
        rows,
        max_gap,
    })
}

/// Reads `1.2`, `pi`, `pi/4`, `3pi/4` or `3*pi/4` as radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let Some(pos) = t.find("pi") else {
        return t
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"));
    };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + 2..];
    let coef = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"))?,
    };
    let div = match tail.strip_prefix('/') {
        Some(d) => d
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"))?,
        None if tail.is_empty() => 1.0,
        None => return Err(format!("bad angle {s:?}")),
    };
    let v = coef * PI / div;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad angle {s:?}"))
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}
