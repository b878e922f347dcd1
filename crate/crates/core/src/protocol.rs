//! The four two-ion preparations, the entangled joint measurement and the
//! resulting outcome-probability matrix.
//!
//! Preparations follow the pulse sequence: a collective `U(π/4, −π/2)` on
//! `|11⟩` gives `|φ₀⟩⊗|φ₀⟩`, then addressed `Uz(π)` pulses flip the selected
//! ions to `|φ₁⟩`. Every addressed pulse leaks a coherent `Uz(κπ)` onto the
//! neighbouring ion, which is what turns `|φ₀⟩`/`|φ₁⟩` into the primed states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{
    born_probabilities, collective_rotation, controlled_phase, depolarize, diag_z_beta, hadamard,
    ms_gate, z_rotation, PureState, QuantumError, Unitary,
};

/// Row-sum tolerance for probability matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-10;
/// A column counts as forbidden for a row when its ideal probability is below this.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Upper end of the accepted crosstalk range.
pub const MAX_KAPPA: f64 = 0.5;

/// Computational outcomes in storage order.
pub const OUTCOME_LABELS: [&str; 4] = ["11", "10", "01", "00"];

/// Forbidden outcome column per preparation, found at κ = 0 without noise and
/// frozen here. Both measurement circuits must reproduce it.
pub const EXPECTED_ASSIGNMENT: [usize; 4] = [3, 2, 1, 0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("crosstalk κ = {0} outside [0, {MAX_KAPPA}]")]
    InvalidKappa(f64),
    #[error("forbidden-outcome pattern is not a bijection: {0:?}")]
    NotBijection(Vec<Vec<usize>>),
    #[error("row {row} is not a probability distribution: {reason}")]
    InvalidRow { row: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Which product state is prepared, in the order used by the overlap bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreparationLabel {
    /// `|φ₀⟩⊗|φ₀⟩`
    P00,
    /// `|φ₀′⟩⊗|φ₁⟩`
    P0p1,
    /// `|φ₁⟩⊗|φ₀′⟩`
    P10p,
    /// `|φ₁′⟩⊗|φ₁′⟩`
    P1p1p,
}

impl PreparationLabel {
    pub const ALL: [PreparationLabel; 4] = [Self::P00, Self::P0p1, Self::P10p, Self::P1p1p];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::P00 => "00",
            Self::P0p1 => "0'1",
            Self::P10p => "10'",
            Self::P1p1p => "1'1'",
        }
    }

    /// Whether ion 1 / ion 2 receive an addressed `Uz(π)` pulse.
    fn addressed(self) -> (bool, bool) {
        match self {
            Self::P00 => (false, false),
            Self::P0p1 => (false, true),
            Self::P10p => (true, false),
            Self::P1p1p => (true, true),
        }
    }
}

impl fmt::Display for PreparationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fraction of an addressed π phase that leaks onto the other ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkConfig {
    kappa: f64,
}

impl CrosstalkConfig {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(0.0..=MAX_KAPPA).contains(&kappa) {
            return Err(ProtocolError::InvalidKappa(kappa));
        }
        Ok(Self { kappa })
    }

    pub fn ideal() -> Self {
        Self { kappa: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementCircuit {
    /// `(H⊗H)·R_π`
    Hcz,
    /// Collective rotation plus Mølmer–Sørensen gate.
    Ms,
}

impl MeasurementCircuit {
    pub fn unitary(self) -> Unitary {
        match self {
            Self::Hcz => measurement_circuit(PI, 0.0),
            Self::Ms => measurement_circuit_ms(),
        }
    }
}

fn qubit_state(one: Complex64, zero: f64) -> PureState {
    PureState::qubit(one, Complex64::new(zero, 0.0)).expect("cos²+sin² = 1")
}

/// `cos(π/8)|1⟩ + sin(π/8)|0⟩`
pub fn phi0() -> PureState {
    phi0_prime(0.0)
}

/// `cos(π/8)|1⟩ − sin(π/8)|0⟩`
pub fn phi1() -> PureState {
    phi1_prime(0.0)
}

/// `e^{iκπ}cos(π/8)|1⟩ + sin(π/8)|0⟩`
pub fn phi0_prime(kappa: f64) -> PureState {
    qubit_state(
        Complex64::from_polar(FRAC_PI_8.cos(), kappa * PI),
        FRAC_PI_8.sin(),
    )
}

/// `e^{iκπ}cos(π/8)|1⟩ − sin(π/8)|0⟩`
pub fn phi1_prime(kappa: f64) -> PureState {
    qubit_state(
        Complex64::from_polar(FRAC_PI_8.cos(), kappa * PI),
        -FRAC_PI_8.sin(),
    )
}

/// Closed-form product state for a preparation (reference for [`prepare_input`]).
pub fn closed_form_input(label: PreparationLabel, config: CrosstalkConfig) -> PureState {
    let k = config.kappa();
    let (a, b) = match label {
        PreparationLabel::P00 => (phi0(), phi0()),
        PreparationLabel::P0p1 => (phi0_prime(k), phi1()),
        PreparationLabel::P10p => (phi1(), phi0_prime(k)),
        PreparationLabel::P1p1p => (phi1_prime(k), phi1_prime(k)),
    };
    a.tensor(&b).expect("two single qubits")
}

/// Builds the two-ion input by running the preparation pulse sequence.
pub fn prepare_input(label: PreparationLabel, config: CrosstalkConfig) -> PureState {
    let leak = config.kappa() * PI;
    let mut sequence = collective_rotation(FRAC_PI_4, -FRAC_PI_2, 2).expect("two qubits");
    let (first, second) = label.addressed();
    let pulses = [(first, 1usize, 2usize), (second, 2, 1)];
    for (target, neighbour) in pulses
        .iter()
        .filter(|(on, _, _)| *on)
        .map(|&(_, t, n)| (t, n))
    {
        let addressed = z_rotation(target, PI, 2).expect("valid qubit");
        let residual = z_rotation(neighbour, leak, 2).expect("valid qubit");
        sequence = sequence
            .then(&addressed)
            .and_then(|s| s.then(&residual))
            .expect("matching dimensions");
    }
    let s11 = PureState::basis(4, 0).expect("|11⟩");
    s11.apply(&sequence).expect("matching dimensions")
}

/// `(H⊗H) · R_α · (Z_β⊗Z_β)`, to be followed by a computational-basis measurement.
pub fn measurement_circuit(alpha: f64, beta: f64) -> Unitary {
    let z = diag_z_beta(beta);
    let zz = z.kron(&z).expect("single-qubit factors");
    let h = hadamard(1, 1).expect("single qubit");
    let hh = h.kron(&h).expect("single-qubit factors");
    zz.then(&controlled_phase(alpha))
        .and_then(|u| u.then(&hh))
        .expect("matching dimensions")
}

/// The native trapped-ion form of the measurement: `U(π/2, π)` followed by
/// `MS(π/2, 0)`, with a collective `Uz(π/2)` compensation pair around the MS
/// pulse. The product equals `MS(π/2, π/2)·U(π/2, π)` and has the same outcome
/// distribution as [`measurement_circuit`]`(π, 0)` on every input.
pub fn measurement_circuit_ms() -> Unitary {
    let shift = |angle: f64| {
        z_rotation(1, angle, 2)
            .and_then(|a| a.then(&z_rotation(2, angle, 2)?))
            .expect("valid qubits")
    };
    collective_rotation(FRAC_PI_2, PI, 2)
        .and_then(|u| u.then(&shift(FRAC_PI_2)))
        .and_then(|u| u.then(&ms_gate(FRAC_PI_2, 0.0)))
        .and_then(|u| u.then(&shift(-FRAC_PI_2)))
        .expect("matching dimensions")
}

/// Which outcome column is forbidden for each preparation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OutcomeAssignment([usize; 4]);

impl OutcomeAssignment {
    pub fn new(columns: [usize; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for &c in &columns {
            if c >= 4 || seen[c] {
                return Err(ProtocolError::NotBijection(
                    columns.iter().map(|&c| vec![c]).collect(),
                ));
            }
            seen[c] = true;
        }
        Ok(Self(columns))
    }

    pub fn column(&self, label: PreparationLabel) -> usize {
        self.0[label.index()]
    }

    pub fn columns(&self) -> [usize; 4] {
        self.0
    }
}

/// Locates the zero column of each row at κ = 0 without noise.
pub fn discover_assignment(circuit: MeasurementCircuit) -> Result<OutcomeAssignment> {
    assignment_for(&circuit.unitary())
}

/// As [`discover_assignment`] for an arbitrary two-qubit measurement unitary.
pub fn assignment_for(u: &Unitary) -> Result<OutcomeAssignment> {
    let rows = ideal_rows(CrosstalkConfig::ideal(), u)?;
    let zeros: Vec<Vec<usize>> = rows
        .iter()
        .map(|row| (0..4).filter(|&j| row[j] < ZERO_TOLERANCE).collect())
        .collect();
    if zeros.iter().any(|z| z.len() != 1) {
        return Err(ProtocolError::NotBijection(zeros));
    }
    let columns = [zeros[0][0], zeros[1][0], zeros[2][0], zeros[3][0]];
    OutcomeAssignment::new(columns).map_err(|_| ProtocolError::NotBijection(zeros))
}

fn ideal_rows(config: CrosstalkConfig, u: &Unitary) -> Result<[[f64; 4]; 4]> {
    let mut rows = [[0.0; 4]; 4];
    for label in PreparationLabel::ALL {
        let out = prepare_input(label, config).apply(u)?;
        rows[label.index()].copy_from_slice(&born_probabilities(&out));
    }
    Ok(rows)
}

/// Outcome probabilities: rows are preparations, columns are outcomes `11,10,01,00`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityMatrix {
    entries: [[f64; 4]; 4],
    assignment: OutcomeAssignment,
}

impl ProbabilityMatrix {
    /// Validates rows (non-negative, summing to one) against an assignment.
    pub fn from_rows(entries: [[f64; 4]; 4], assignment: OutcomeAssignment) -> Result<Self> {
        for (row, values) in entries.iter().enumerate() {
            if let Some(v) = values
                .iter()
                .find(|v| **v < -ZERO_TOLERANCE || !v.is_finite())
            {
                return Err(ProtocolError::InvalidRow {
                    row,
                    reason: format!("entry {v}"),
                });
            }
            let sum: f64 = values.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ProtocolError::InvalidRow {
                    row,
                    reason: format!("sums to {sum}"),
                });
            }
        }
        Ok(Self {
            entries,
            assignment,
        })
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    pub fn row(&self, label: PreparationLabel) -> &[f64; 4] {
        &self.entries[label.index()]
    }

    pub fn assignment(&self) -> OutcomeAssignment {
        self.assignment
    }
}

/// Entry `(k, j)`: probability of outcome `j` after the measurement circuit on
/// preparation `k`, optionally depolarised by `noise_p` before measuring.
pub fn probability_matrix(
    config: CrosstalkConfig,
    noise_p: f64,
    circuit: MeasurementCircuit,
) -> Result<ProbabilityMatrix> {
    let u = circuit.unitary();
    probability_matrix_for(config, noise_p, &u, assignment_for(&u)?)
}

/// As [`probability_matrix`] for an arbitrary measurement unitary, with the
/// forbidden columns supplied by the caller.
pub fn probability_matrix_for(
    config: CrosstalkConfig,
    noise_p: f64,
    u: &Unitary,
    assignment: OutcomeAssignment,
) -> Result<ProbabilityMatrix> {
    let mut entries = [[0.0; 4]; 4];
    for label in PreparationLabel::ALL {
        let rho = depolarize(&prepare_input(label, config).to_density(), noise_p)?;
        let out = rho.apply(u)?;
        entries[label.index()].copy_from_slice(&born_probabilities(&out));
    }
    ProbabilityMatrix::from_rows(entries, assignment)
}

/// `(ε₁, ε₂, ε₃, ε₄)`: forbidden-outcome probabilities in preparation order.
pub fn forbidden_probabilities(matrix: &ProbabilityMatrix) -> [f64; 4] {
    PreparationLabel::ALL.map(|l| matrix.row(l)[matrix.assignment().column(l)])
}

/// Largest total-variation distance between the two circuits' outcome
/// distributions over the four preparations.
pub fn circuit_equivalence_tvd(config: CrosstalkConfig) -> f64 {
    let a = ideal_rows(config, &MeasurementCircuit::Hcz.unitary()).expect("dim 4");
    let b = ideal_rows(config, &MeasurementCircuit::Ms.unitary()).expect("dim 4");
    a.iter()
        .zip(&b)
        .map(|(x, y)| total_variation(x, y))
        .fold(0.0, f64::max)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fidelity(a: &PureState, b: &PureState) -> f64 {
        a.fidelity(b).unwrap()
    }

    #[test]
    fn custom_unitary_assignment() {
        let u = measurement_circuit(PI, 0.0);
        assert_eq!(assignment_for(&u).unwrap().columns(), EXPECTED_ASSIGNMENT);
        let broken = measurement_circuit(FRAC_PI_2, 0.0);
        assert!(matches!(
            assignment_for(&broken),
            Err(ProtocolError::NotBijection(_))
        ));
        let m = probability_matrix_for(
            CrosstalkConfig::ideal(),
            0.0,
            &u,
            assignment_for(&u).unwrap(),
        )
        .unwrap();
        let reference =
            probability_matrix(CrosstalkConfig::ideal(), 0.0, MeasurementCircuit::Hcz).unwrap();
        assert_eq!(m, reference);
    }

    #[test]
    fn kappa_range() {
        assert!(CrosstalkConfig::new(-0.01).is_err());
        assert!(CrosstalkConfig::new(0.51).is_err());
        assert!(CrosstalkConfig::new(f64::NAN).is_err());
        assert_eq!(CrosstalkConfig::new(0.01).unwrap().kappa(), 0.01);
    }

    #[test]
    fn preparation_examples() {
        let k = CrosstalkConfig::new(0.01).unwrap();
        let p00 = prepare_input(PreparationLabel::P00, k);
        assert!((fidelity(&p00, &phi0().tensor(&phi0()).unwrap()) - 1.0).abs() < 1e-12);

        let ideal = prepare_input(PreparationLabel::P0p1, CrosstalkConfig::ideal());
        assert!((fidelity(&ideal, &phi0().tensor(&phi1()).unwrap()) - 1.0).abs() < 1e-12);

        let primed = prepare_input(PreparationLabel::P0p1, k);
        let target = phi0_prime(0.01).tensor(&phi1()).unwrap();
        assert!((fidelity(&primed, &target) - 1.0).abs() < 1e-12);
        // The crosstalk is visible: not the unprimed state.
        assert!(fidelity(&primed, &phi0().tensor(&phi1()).unwrap()) < 1.0 - 1e-6);
    }

    #[test]
    fn preparations_match_closed_forms() {
        for kappa in [0.0, 0.005, 0.01, 0.02] {
            let cfg = CrosstalkConfig::new(kappa).unwrap();
            for label in PreparationLabel::ALL {
                let f = fidelity(&prepare_input(label, cfg), &closed_form_input(label, cfg));
                assert!((f - 1.0).abs() < 1e-12, "{label} at κ={kappa}: {f}");
            }
        }
    }

    #[test]
    fn measurement_examples() {
        let h = hadamard(1, 1).unwrap();
        let hh = h.kron(&h).unwrap();
        assert!((measurement_circuit(0.0, 0.0).matrix() - hh.matrix()).camax() < 1e-15);

        let out = prepare_input(PreparationLabel::P00, CrosstalkConfig::ideal())
            .apply(&measurement_circuit(PI, 0.0))
            .unwrap();
        let zeros = born_probabilities(&out)
            .iter()
            .filter(|p| **p < 1e-12)
            .count();
        assert_eq!(zeros, 1);

        for (a, b) in [(0.3, 1.1), (-2.0, 0.4), (PI, PI)] {
            assert!(measurement_circuit(a, b).unitarity_error() < 1e-12);
        }
        assert!(measurement_circuit_ms().unitarity_error() < 1e-12);
    }

    #[test]
    fn ms_circuit_is_rephased_ms_gate() {
        let direct = collective_rotation(FRAC_PI_2, PI, 2)
            .unwrap()
            .then(&ms_gate(FRAC_PI_2, FRAC_PI_2))
            .unwrap();
        assert!((measurement_circuit_ms().matrix() - direct.matrix()).camax() < 1e-12);
    }

    #[test]
    fn ms_circuit_matches_on_inputs() {
        let state = phi0().tensor(&phi0()).unwrap();
        let a = born_probabilities(&state.apply(&measurement_circuit(PI, 0.0)).unwrap());
        let b = born_probabilities(&state.apply(&measurement_circuit_ms()).unwrap());
        assert!(total_variation(&a, &b) < 1e-10);
        assert!(circuit_equivalence_tvd(CrosstalkConfig::ideal()) < 1e-10);
        assert!(circuit_equivalence_tvd(CrosstalkConfig::new(0.03).unwrap()) < 1e-10);
    }

    #[test]
    fn assignment_is_frozen() {
        for circuit in [MeasurementCircuit::Hcz, MeasurementCircuit::Ms] {
            let a = discover_assignment(circuit).unwrap();
            assert_eq!(a.columns(), EXPECTED_ASSIGNMENT);
        }
        assert!(OutcomeAssignment::new([0, 0, 1, 2]).is_err());
        assert!(OutcomeAssignment::new([0, 1, 2, 4]).is_err());
    }

    #[test]
    fn ideal_matrix_pinned() {
        // Each row has a forbidden outcome, a doubly-likely outcome and two quarter outcomes.
        let expected = [
            [0.5, 0.25, 0.25, 0.0],
            [0.25, 0.5, 0.0, 0.25],
            [0.25, 0.0, 0.5, 0.25],
            [0.0, 0.25, 0.25, 0.5],
        ];
        let m = probability_matrix(CrosstalkConfig::ideal(), 0.0, MeasurementCircuit::Hcz).unwrap();
        for (row, exp) in m.entries().iter().zip(&expected) {
            for (v, e) in row.iter().zip(exp) {
                assert!((v - e).abs() < 1e-12, "{row:?}");
            }
        }
        for eps in forbidden_probabilities(&m) {
            assert!(eps.abs() < 1e-12);
        }
    }

    #[test]
    fn crosstalk_lifts_forbidden_outcomes() {
        let m = probability_matrix(
            CrosstalkConfig::new(0.01).unwrap(),
            0.0,
            MeasurementCircuit::Hcz,
        )
        .unwrap();
        let eps = forbidden_probabilities(&m);
        // |φ₀⟩⊗|φ₀⟩ gets no addressed pulse, so its forbidden outcome stays at zero.
        assert!(eps[0].abs() < 1e-12);
        for e in &eps[1..] {
            assert!(*e > 0.0 && *e < 0.005, "{eps:?}");
        }
    }

    #[test]
    fn crosstalk_monotone_in_kappa() {
        let mut prev = [0.0; 4];
        for step in 0..=50 {
            let kappa = step as f64 * 0.001;
            let m = probability_matrix(
                CrosstalkConfig::new(kappa).unwrap(),
                0.0,
                MeasurementCircuit::Hcz,
            )
            .unwrap();
            let eps = forbidden_probabilities(&m);
            for k in 1..4 {
                assert!(eps[k] >= prev[k] - 1e-15, "κ={kappa} k={k}");
            }
            if step == 0 {
                assert!(eps.iter().all(|e| e.abs() < 1e-12));
            }
            prev = eps;
        }
    }

    #[test]
    fn uniform_rows() {
        let m = ProbabilityMatrix::from_rows(
            [[0.25; 4]; 4],
            OutcomeAssignment::new(EXPECTED_ASSIGNMENT).unwrap(),
        )
        .unwrap();
        assert_eq!(forbidden_probabilities(&m), [0.25; 4]);
        let bad = ProbabilityMatrix::from_rows(
            [[0.3; 4]; 4],
            OutcomeAssignment::new(EXPECTED_ASSIGNMENT).unwrap(),
        );
        assert!(matches!(bad, Err(ProtocolError::InvalidRow { row: 0, .. })));
    }

    #[test]
    fn noise_rejected_out_of_range() {
        let r = probability_matrix(CrosstalkConfig::ideal(), 1.2, MeasurementCircuit::Hcz);
        assert!(matches!(r, Err(ProtocolError::Quantum(_))));
    }
}
