//! Finite-shot data taking and its analysis against the ε threshold.
//!
//! Error bars are projection noise: `√(ε̂(1−ε̂)/N)` per input. A zero (or full)
//! count would give a zero error bar, so those cells use the 68% Wilson score
//! half-width instead. The four inputs are separate runs, so the mean's error
//! is propagated in quadrature. The tail probability is the one-sided
//! standard-normal tail at the σ distance below the threshold; reading "the
//! probability of the data under a threshold-saturating model" this way is an
//! interpretation, not a derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::bounds::{bound_report, epsilon_threshold, BoundReport, BoundsError};
use crate::protocol::{
    forbidden_probabilities, probability_matrix, CrosstalkConfig, MeasurementCircuit,
    OutcomeAssignment, PreparationLabel, ProbabilityMatrix, ProtocolError,
};

/// z-score of a one-standard-deviation (68.27%) interval.
pub const ONE_SIGMA_Z: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("shot count must be at least 1")]
    ZeroShots,
    #[error("no record for input {0}")]
    MissingLabel(PreparationLabel),
    #[error("more than one record for input {0}")]
    DuplicateLabel(PreparationLabel),
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("target mean ε = {0} cannot be reached with depolarizing noise in [0, 1]")]
    CalibrationUnreachable(f64),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// Outcome counts for one input label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotRecord {
    pub label: PreparationLabel,
    pub shots: u64,
    /// Counts for outcomes `11, 10, 01, 00`.
    pub counts: [u64; 4],
    pub seed: u64,
}

impl ShotRecord {
    pub fn frequencies(&self) -> [f64; 4] {
        self.counts.map(|c| c as f64 / self.shots as f64)
    }
}

/// Multinomial sampling of every row with `shots` repetitions per input.
pub fn simulate_run(matrix: &ProbabilityMatrix, shots: u64, seed: u64) -> Result<Vec<ShotRecord>> {
    simulate_run_per_input(matrix, [shots; 4], seed)
}

/// As [`simulate_run`] with a separate shot count per input. Each row draws
/// from its own ChaCha stream of the master seed.
pub fn simulate_run_per_input(
    matrix: &ProbabilityMatrix,
    shots: [u64; 4],
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    if shots.contains(&0) {
        return Err(ExperimentError::ZeroShots);
    }
    PreparationLabel::ALL
        .iter()
        .map(|&label| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(label.index() as u64);
            let n = shots[label.index()];
            let counts = multinomial(&mut rng, n, matrix.row(label));
            Ok(ShotRecord {
                label,
                shots: n,
                counts,
                seed,
            })
        })
        .collect()
}

/// Sequential conditional binomials.
fn multinomial(rng: &mut ChaCha8Rng, n: u64, probs: &[f64; 4]) -> [u64; 4] {
    let mut counts = [0u64; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        if left == 0 {
            break;
        }
        let p = if mass > 0.0 {
            (probs[k].max(0.0) / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(left, p)
            .expect("p clamped to [0, 1]")
            .sample(rng);
        counts[k] = draw;
        left -= draw;
        mass -= probs[k].max(0.0);
    }
    counts[3] = left;
    counts
}

/// Half-width of the Wilson score interval for `count` successes in `n` trials.
pub fn wilson_half_width(count: u64, n: u64, z: f64) -> f64 {
    let n = n as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Projection-noise error of an estimated rate, with the Wilson rule at the
/// degenerate ends.
pub fn projection_error(count: u64, n: u64) -> f64 {
    if count == 0 || count == n {
        wilson_half_width(count, n, ONE_SIGMA_Z)
    } else {
        let p = count as f64 / n as f64;
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonEstimate {
    pub eps: [f64; 4],
    pub eps_err: [f64; 4],
    pub shots: [u64; 4],
}

/// `ε̂_k` = forbidden count / shots for each input.
pub fn estimate_epsilons(
    records: &[ShotRecord],
    assignment: OutcomeAssignment,
) -> Result<EpsilonEstimate> {
    let mut slots: [Option<&ShotRecord>; 4] = [None; 4];
    for r in records {
        let slot = &mut slots[r.label.index()];
        if slot.is_some() {
            return Err(ExperimentError::DuplicateLabel(r.label));
        }
        if r.shots == 0 {
            return Err(ExperimentError::ZeroShots);
        }
        *slot = Some(r);
    }
    let mut out = EpsilonEstimate {
        eps: [0.0; 4],
        eps_err: [0.0; 4],
        shots: [0; 4],
    };
    for label in PreparationLabel::ALL {
        let r = slots[label.index()].ok_or(ExperimentError::MissingLabel(label))?;
        let count = r.counts[assignment.column(label)];
        let k = label.index();
        out.eps[k] = count as f64 / r.shots as f64;
        out.eps_err[k] = projection_error(count, r.shots);
        out.shots[k] = r.shots;
    }
    Ok(out)
}

/// Replaces zero error bars on degenerate rates (ε ∈ {0, 1}) with the Wilson
/// half-width for `shots` trials.
pub fn fill_degenerate_errors(eps: [f64; 4], eps_err: [f64; 4], shots: u64) -> [f64; 4] {
    std::array::from_fn(|k| {
        if eps_err[k] == 0.0 && shots > 0 && (eps[k] == 0.0 || eps[k] == 1.0) {
            let count = if eps[k] == 0.0 { 0 } else { shots };
            wilson_half_width(count, shots, ONE_SIGMA_Z)
        } else {
            eps_err[k]
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub eps: [f64; 4],
    pub eps_err: [f64; 4],
    pub mean: f64,
    /// Error used for the σ distance (the override if one was given).
    pub mean_err: f64,
    /// `¼√(Σ err_k²)`.
    pub propagated_mean_err: f64,
    pub mean_err_override: Option<f64>,
    pub threshold: f64,
    /// `(threshold − mean)/mean_err`; `None` when `mean_err` is zero.
    pub sigma_distance: Option<f64>,
    /// One-sided normal tail at `sigma_distance`.
    pub tail_probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub epsilon: EpsilonReport,
    pub bound: BoundReport,
}

/// `P(Z ≥ x)` for a standard normal `Z`.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn analyze(
    eps: [f64; 4],
    eps_err: [f64; 4],
    kappa: f64,
    mean_err_override: Option<f64>,
) -> Result<Analysis> {
    for &e in &eps {
        if !(0.0..=1.0).contains(&e) {
            return Err(ExperimentError::OutOfRange {
                what: "eps",
                value: e,
            });
        }
    }
    for &e in &eps_err {
        if !(0.0..=1.0).contains(&e) {
            return Err(ExperimentError::OutOfRange {
                what: "eps_err",
                value: e,
            });
        }
    }
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(ExperimentError::OutOfRange {
            what: "kappa",
            value: kappa,
        });
    }
    if let Some(o) = mean_err_override {
        if !o.is_finite() || o < 0.0 {
            return Err(ExperimentError::OutOfRange {
                what: "mean_err_override",
                value: o,
            });
        }
    }

    let mean = eps.iter().sum::<f64>() / 4.0;
    let propagated = eps_err.iter().map(|e| e * e).sum::<f64>().sqrt() / 4.0;
    let mean_err = mean_err_override.unwrap_or(propagated);
    let threshold = epsilon_threshold(kappa);
    let sigma_distance = (mean_err > 0.0).then(|| (threshold - mean) / mean_err);
    let bound = bound_report(mean, kappa)?;
    Ok(Analysis {
        epsilon: EpsilonReport {
            eps,
            eps_err,
            mean,
            mean_err,
            propagated_mean_err: propagated,
            mean_err_override,
            threshold,
            sigma_distance,
            tail_probability: sigma_distance.map(normal_tail),
        },
        bound,
    })
}

/// Depolarizing strength that brings the mean forbidden probability to `target_mean`.
///
/// The mean is affine in the noise strength, so two evaluations fix it.
pub fn calibrate_noise(
    config: CrosstalkConfig,
    circuit: MeasurementCircuit,
    target_mean: f64,
) -> Result<f64> {
    let mean_at = |p: f64| -> Result<f64> {
        let m = probability_matrix(config, p, circuit)?;
        Ok(forbidden_probabilities(&m).iter().sum::<f64>() / 4.0)
    };
    let (clean, mixed) = (mean_at(0.0)?, mean_at(1.0)?);
    let p = (target_mean - clean) / (mixed - clean);
    if !(0.0..=1.0).contains(&p) {
        return Err(ExperimentError::CalibrationUnreachable(target_mean));
    }
    Ok(p)
}

/// Pearson χ² goodness-of-fit p-value of `counts` against `probs`. Cells with
/// zero expected probability are dropped; the degrees of freedom are the
/// remaining cells minus one.
pub fn goodness_of_fit(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p <= 0.0 {
            continue;
        }
        let expected = p * n as f64;
        stat += (c as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    let dist = ChiSquared::new((cells - 1) as f64).expect("positive dof");
    1.0 - dist.cdf(stat)
}
