//! Finite-dimensional quantum mechanics for registers of one or two qubits.
//!
//! # Basis convention
//!
//! Each qubit is encoded as `|1⟩` (the S₁/₂ ground level) and `|0⟩` (the
//! D₅/₂ level). Amplitudes are stored with `|1⟩` first, so a single qubit is
//! `[⟨1|ψ⟩, ⟨0|ψ⟩]` and a two-qubit register is ordered
//! `|11⟩, |10⟩, |01⟩, |00⟩` with qubit 1 as the left tensor factor.
//!
//! Pauli operators act on the logical labels: `σz|0⟩ = |0⟩`,
//! `σz|1⟩ = −|1⟩`, `σx` swaps the labels and `σy|0⟩ = i|1⟩`. With this
//! choice the collective rotation `U(π/4, −π/2)` maps `|11⟩` to
//! `|φ₀⟩⊗|φ₀⟩` and a residual `Uz(κπ)` turns `|φ₀⟩` into `|φ₀′⟩` with a
//! `e^{+iκπ}` phase on the `|1⟩` amplitude.
//!
//! Global phases are never normalised away; comparisons go through overlaps
//! or outcome distributions.

mod gates;
mod state;

pub use gates::{
    collective_rotation, controlled_phase, diag_z_beta, hadamard, ms_gate, z_rotation, Unitary,
};
pub use state::{
    born_probabilities, depolarize, quantum_trace_distance, BornRule, DensityOperator, PureState,
};

use thiserror::Error;

/// Absolute tolerance for normalisation, hermiticity and unitarity checks.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("unsupported register size: {0} qubits (expected 1 or 2)")]
    UnsupportedQubitCount(usize),
    #[error("unsupported dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("state is not normalised: squared norm {0}")]
    NotNormalized(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not unitary (max |U†U − I| = {0:e})")]
    NotUnitary(f64),
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, QuantumError>;

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        d => Err(QuantumError::UnsupportedDimension(d)),
    }
}
