use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{qubits_for_dim, QuantumError, Result, TOLERANCE};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Unitary acting on a one- or two-qubit register, with a readable label.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    matrix: DMatrix<Complex64>,
    label: String,
}

impl Unitary {
    /// Validates `U†U = I` within 1e-12.
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QuantumError::UnsupportedDimension(matrix.nrows()));
        }
        qubits_for_dim(matrix.nrows())?;
        let gate = Self {
            matrix,
            label: label.into(),
        };
        let err = gate.unitarity_error();
        if err > TOLERANCE {
            return Err(QuantumError::NotUnitary(err));
        }
        Ok(gate)
    }

    fn from_parts(matrix: DMatrix<Complex64>, label: String) -> Self {
        Self { matrix, label }
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        let dim = dim_for(n_qubits)?;
        Ok(Self::from_parts(DMatrix::identity(dim, dim), "I".into()))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(d, d)).camax()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.matrix.adjoint(), format!("({})†", self.label))
    }

    /// Circuit composition: `self` first, then `next` (matrix `next · self`).
    pub fn then(&self, next: &Unitary) -> Result<Self> {
        if self.dim() != next.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: next.dim(),
            });
        }
        Ok(Self::from_parts(
            &next.matrix * &self.matrix,
            format!("{}; {}", self.label, next.label),
        ))
    }

    /// `self ⊗ other`, for two single-qubit gates.
    pub fn kron(&self, other: &Unitary) -> Result<Self> {
        if self.n_qubits() + other.n_qubits() > 2 {
            return Err(QuantumError::UnsupportedQubitCount(
                self.n_qubits() + other.n_qubits(),
            ));
        }
        Ok(Self::from_parts(
            self.matrix.kronecker(&other.matrix),
            format!("{} ⊗ {}", self.label, other.label),
        ))
    }

    /// Embeds a single-qubit gate on qubit `qubit` (1-based) of an `n_qubits` register.
    pub fn on_qubit(&self, qubit: usize, n_qubits: usize) -> Result<Self> {
        if self.n_qubits() != 1 {
            return Err(QuantumError::UnsupportedQubitCount(self.n_qubits()));
        }
        check_index(qubit, n_qubits)?;
        match (n_qubits, qubit) {
            (1, _) => Ok(self.clone()),
            (_, 1) => self.kron(&single_identity()),
            _ => single_identity().kron(self),
        }
        .map(|mut g| {
            g.label = format!("{}[{}]", self.label, qubit);
            g
        })
    }
}

impl fmt::Display for Unitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn dim_for(n_qubits: usize) -> Result<usize> {
    match n_qubits {
        1 => Ok(2),
        2 => Ok(4),
        n => Err(QuantumError::UnsupportedQubitCount(n)),
    }
}

fn check_index(qubit: usize, n_qubits: usize) -> Result<()> {
    dim_for(n_qubits)?;
    if qubit == 0 || qubit > n_qubits {
        return Err(QuantumError::QubitOutOfRange {
            index: qubit,
            n_qubits,
        });
    }
    Ok(())
}

fn single_identity() -> Unitary {
    Unitary::from_parts(DMatrix::identity(2, 2), "I".into())
}

fn m2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

// Logical Paulis in storage order (|1⟩, |0⟩).
fn sigma_x() -> DMatrix<Complex64> {
    m2(ZERO, ONE, ONE, ZERO)
}

fn sigma_y() -> DMatrix<Complex64> {
    m2(ZERO, I, -I, ZERO)
}

/// `sin(φ)σy − cos(φ)σx`, the equatorial axis selected by the laser phase.
fn equatorial_axis(phi: f64) -> DMatrix<Complex64> {
    sigma_y() * Complex64::new(phi.sin(), 0.0) - sigma_x() * Complex64::new(phi.cos(), 0.0)
}

/// `U(θ, φ) = exp(−i θ/2 Σᵢ [sin φ σyⁱ − cos φ σxⁱ])` on a register of `n_qubits`.
pub fn collective_rotation(theta: f64, phi: f64, n_qubits: usize) -> Result<Unitary> {
    dim_for(n_qubits)?;
    // The axis operator squares to the identity, so the exponential is closed-form.
    let single = DMatrix::<Complex64>::identity(2, 2) * Complex64::new((theta / 2.0).cos(), 0.0)
        - equatorial_axis(phi) * (I * (theta / 2.0).sin());
    let matrix = if n_qubits == 1 {
        single
    } else {
        single.kronecker(&single)
    };
    Ok(Unitary::from_parts(
        matrix,
        format!("U({theta:.6},{phi:.6})"),
    ))
}

/// `MS(θ, φ) = exp(−i θ/4 [Σᵢ (sin φ σyⁱ − cos φ σxⁱ)]²)` on two qubits.
pub fn ms_gate(theta: f64, phi: f64) -> Unitary {
    // (A⊗I + I⊗A)² = 2I + 2A⊗A and (A⊗A)² = I.
    let axis = equatorial_axis(phi);
    let aa = axis.kronecker(&axis);
    let global = Complex64::from_polar(1.0, -theta / 2.0);
    let matrix = (DMatrix::<Complex64>::identity(4, 4) * Complex64::new((theta / 2.0).cos(), 0.0)
        - aa * (I * (theta / 2.0).sin()))
        * global;
    Unitary::from_parts(matrix, format!("MS({theta:.6},{phi:.6})"))
}

/// `Uz⁽ⁱ⁾(θ) = exp(−i θ/2 σz⁽ⁱ⁾)` on qubit `qubit` (1-based).
pub fn z_rotation(qubit: usize, theta: f64, n_qubits: usize) -> Result<Unitary> {
    check_index(qubit, n_qubits)?;
    // σz = diag(−1, +1) in storage order.
    let single = Unitary::from_parts(
        m2(
            Complex64::from_polar(1.0, theta / 2.0),
            ZERO,
            ZERO,
            Complex64::from_polar(1.0, -theta / 2.0),
        ),
        format!("Uz({theta:.6})"),
    );
    single.on_qubit(qubit, n_qubits)
}

/// Hadamard on qubit `qubit`: `|0⟩ ↦ (|0⟩+|1⟩)/√2`, `|1⟩ ↦ (|0⟩−|1⟩)/√2`.
pub fn hadamard(qubit: usize, n_qubits: usize) -> Result<Unitary> {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Unitary::from_parts(m2(-s, s, s, s), "H".into()).on_qubit(qubit, n_qubits)
}

/// Two-qubit `R_α`: multiplies only the `|11⟩` amplitude by `e^{iα}`.
pub fn controlled_phase(alpha: f64) -> Unitary {
    let mut matrix = DMatrix::<Complex64>::identity(4, 4);
    matrix[(0, 0)] = Complex64::from_polar(1.0, alpha);
    Unitary::from_parts(matrix, format!("R({alpha:.6})"))
}

/// Single-qubit `Z_β = |0⟩⟨0| + e^{iβ}|1⟩⟨1|`.
pub fn diag_z_beta(beta: f64) -> Unitary {
    Unitary::from_parts(
        m2(Complex64::from_polar(1.0, beta), ZERO, ZERO, ONE),
        format!("Z({beta:.6})"),
    )
}
