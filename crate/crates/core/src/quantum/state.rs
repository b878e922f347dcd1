use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::{qubits_for_dim, QuantumError, Result, Unitary, TOLERANCE};

/// Normalised pure state of one or two qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Builds a state from amplitudes that must already be normalised.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::NotNormalized(norm_sq));
        }
        Ok(Self { amplitudes })
    }

    /// Builds a state after rescaling the amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QuantumError::NotNormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes })
    }

    /// Single-qubit `|1⟩` (stored first).
    pub fn one() -> Self {
        Self {
            amplitudes: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    /// Single-qubit `|0⟩`.
    pub fn zero() -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// Computational basis vector with the given storage index.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        if index >= dim {
            return Err(QuantumError::DimensionMismatch {
                left: index,
                right: dim,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Single-qubit state `a|1⟩ + b|0⟩`.
    pub fn qubit(one: Complex64, zero: Complex64) -> Result<Self> {
        Self::new(vec![one, zero])
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    /// `self ⊗ other`; only 1 ⊗ 1 is representable.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.n_qubits() + other.n_qubits() > 2 {
            return Err(QuantumError::UnsupportedQubitCount(
                self.n_qubits() + other.n_qubits(),
            ));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(PureState { amplitudes })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&self, gate: &Unitary) -> Result<PureState> {
        if gate.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: gate.dim(),
                right: self.dim(),
            });
        }
        let v = gate.matrix() * DVector::from_column_slice(&self.amplitudes);
        Ok(PureState {
            amplitudes: v.iter().copied().collect(),
        })
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: 2,
            });
        }
        let (one, zero) = (self.amplitudes[0], self.amplitudes[1]);
        let coherence = one.conj() * zero;
        Ok([
            2.0 * coherence.re,
            -2.0 * coherence.im,
            zero.norm_sqr() - one.norm_sqr(),
        ])
    }

    /// Single-qubit state with the given Bloch direction (need not be unit length).
    pub fn from_bloch(direction: [f64; 3]) -> Result<PureState> {
        let len = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len == 0.0 || !len.is_finite() {
            return Err(QuantumError::NotNormalized(len));
        }
        let [x, y, z] = direction.map(|c| c / len);
        // Polar angle measured from the logical |0⟩ pole.
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        // |ψ⟩ = cos(θ/2)|0⟩ + e^{iϕ} sin(θ/2)|1⟩
        let zero = Complex64::new((theta / 2.0).cos(), 0.0);
        let one = Complex64::from_polar((theta / 2.0).sin(), phi);
        PureState::new(vec![one, zero])
    }

    pub fn to_density(&self) -> DensityOperator {
        let v = DVector::from_column_slice(&self.amplitudes);
        DensityOperator {
            matrix: &v * v.adjoint(),
        }
    }
}

/// Density operator on one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates hermiticity, unit trace and positivity (eigenvalues ≥ −1e-12).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QuantumError::InvalidDensity(format!(
                "matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        qubits_for_dim(matrix.nrows())?;
        let herm_dev = (&matrix - matrix.adjoint()).camax();
        if herm_dev > TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!(
                "not Hermitian (deviation {herm_dev:e})"
            )));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TOLERANCE || trace.im.abs() > TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!("trace {trace}")));
        }
        let min_eig = matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -TOLERANCE {
            return Err(QuantumError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = match n_qubits {
            1 => 2,
            2 => 4,
            n => return Err(QuantumError::UnsupportedQubitCount(n)),
        };
        Ok(Self {
            matrix: DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `UρU†`.
    pub fn apply(&self, gate: &Unitary) -> Result<DensityOperator> {
        if gate.dim() != self.dim() {
            return Err(QuantumError::DimensionMismatch {
                left: gate.dim(),
                right: self.dim(),
            });
        }
        let u = gate.matrix();
        Ok(DensityOperator {
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    /// Reduced state of qubit `qubit` (1 or 2) of a two-qubit operator.
    pub fn reduced(&self, qubit: usize) -> Result<DensityOperator> {
        if self.dim() != 4 {
            return Err(QuantumError::DimensionMismatch {
                left: self.dim(),
                right: 4,
            });
        }
        if !(1..=2).contains(&qubit) {
            return Err(QuantumError::QubitOutOfRange {
                index: qubit,
                n_qubits: 2,
            });
        }
        let m = &self.matrix;
        let out = DMatrix::from_fn(2, 2, |r, c| {
            (0..2)
                .map(|k| match qubit {
                    1 => m[(2 * r + k, 2 * c + k)],
                    _ => m[(2 * k + r, 2 * k + c)],
                })
                .sum()
        });
        Ok(DensityOperator { matrix: out })
    }
}

/// Anything that yields computational-basis outcome probabilities.
pub trait BornRule {
    fn probabilities(&self) -> Vec<f64>;
}

impl BornRule for PureState {
    fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl BornRule for DensityOperator {
    fn probabilities(&self) -> Vec<f64> {
        self.matrix
            .diagonal()
            .iter()
            .map(|d| d.re.max(0.0))
            .collect()
    }
}

/// Computational-basis probabilities in storage order (`|11⟩,|10⟩,|01⟩,|00⟩`
/// for two qubits). Normalisation is guaranteed by the state constructors.
pub fn born_probabilities<S: BornRule + ?Sized>(state: &S) -> Vec<f64> {
    state.probabilities()
}

/// Pure-state trace distance `√(1 − |⟨ψ₀|ψ₁⟩|²)`.
pub fn quantum_trace_distance(psi0: &PureState, psi1: &PureState) -> Result<f64> {
    let overlap = psi0.fidelity(psi1)?;
    Ok((1.0 - overlap).max(0.0).sqrt())
}

/// `(1 − p)ρ + p·I/d`.
pub fn depolarize(state: &DensityOperator, p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::ProbabilityOutOfRange(p));
    }
    let d = state.dim();
    let mixed = DMatrix::<Complex64>::identity(d, d) * Complex64::new(p / d as f64, 0.0);
    Ok(DensityOperator {
        matrix: state.matrix() * Complex64::new(1.0 - p, 0.0) + mixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn phi0() -> PureState {
        PureState::qubit(c((PI / 8.0).cos(), 0.0), c((PI / 8.0).sin(), 0.0)).unwrap()
    }

    fn phi1() -> PureState {
        PureState::qubit(c((PI / 8.0).cos(), 0.0), c(-(PI / 8.0).sin(), 0.0)).unwrap()
    }

    #[test]
    fn rejects_bad_states() {
        assert!(matches!(
            PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(QuantumError::NotNormalized(_))
        ));
        assert!(matches!(
            PureState::new(vec![c(1.0, 0.0); 3]),
            Err(QuantumError::UnsupportedDimension(3))
        ));
        assert!(PureState::normalized(vec![c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn born_examples() {
        let s11 = PureState::one().tensor(&PureState::one()).unwrap();
        assert_eq!(born_probabilities(&s11), vec![1.0, 0.0, 0.0, 0.0]);

        let p = born_probabilities(&phi0());
        assert!((p[0] - (PI / 8.0).cos().powi(2)).abs() < 1e-15);
        assert!((p[1] - (PI / 8.0).sin().powi(2)).abs() < 1e-15);
        assert!((p[0] - 0.8536).abs() < 1e-4 && (p[1] - 0.1464).abs() < 1e-4);

        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        for q in born_probabilities(&mixed) {
            assert!((q - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn trace_distance_examples() {
        assert!(quantum_trace_distance(&phi0(), &phi0()).unwrap() < 1e-7);
        let d = quantum_trace_distance(&phi0(), &phi1()).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let d = quantum_trace_distance(&PureState::zero(), &PureState::one()).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let two = PureState::one().tensor(&PureState::one()).unwrap();
        assert!(matches!(
            quantum_trace_distance(&phi0(), &two),
            Err(QuantumError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn depolarize_examples() {
        let rho = phi0().tensor(&phi1()).unwrap().to_density();
        let same = depolarize(&rho, 0.0).unwrap();
        assert!((same.matrix() - rho.matrix()).camax() < 1e-15);

        let full = depolarize(&rho, 1.0).unwrap();
        let mixed = DensityOperator::maximally_mixed(2).unwrap();
        assert!((full.matrix() - mixed.matrix()).camax() < 1e-15);

        // Pure input: Tr(ρ'²) = (1−p)² + 2p(1−p)/d + p²/d.
        let half = depolarize(&rho, 0.5).unwrap();
        let checked = DensityOperator::new(half.matrix().clone()).unwrap();
        let expected = 0.25 + 2.0 * 0.25 / 4.0 + 0.25 / 4.0;
        assert!((checked.purity() - expected).abs() < 1e-12);
        assert!((checked.trace().re - 1.0).abs() < 1e-12);

        assert!(matches!(
            depolarize(&rho, 1.5),
            Err(QuantumError::ProbabilityOutOfRange(_))
        ));
        assert!(depolarize(&rho, -0.1).is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = DMatrix::<Complex64>::identity(2, 2);
        assert!(DensityOperator::new(m.clone()).is_err()); // trace 2
        m[(1, 1)] = c(0.0, 0.0);
        assert!(DensityOperator::new(m.clone()).is_ok());
        m[(0, 1)] = c(0.0, 0.3);
        assert!(DensityOperator::new(m.clone()).is_err()); // not Hermitian
        let neg =
            DMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityOperator::new(neg).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        assert_eq!(PureState::zero().bloch_vector().unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(PureState::one().bloch_vector().unwrap(), [0.0, 0.0, -1.0]);
        for dir in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, -0.4, 0.5]] {
            let s = PureState::from_bloch(dir).unwrap();
            let b = s.bloch_vector().unwrap();
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            for k in 0..3 {
                assert!((b[k] - dir[k] / n).abs() < 1e-12, "{b:?} vs {dir:?}");
            }
        }
    }

    #[test]
    fn reduced_state_of_product() {
        let rho = phi0().tensor(&PureState::zero()).unwrap().to_density();
        let r1 = rho.reduced(1).unwrap();
        assert!((r1.matrix() - phi0().to_density().matrix()).camax() < 1e-15);
        let r2 = rho.reduced(2).unwrap();
        assert!((r2.matrix() - PureState::zero().to_density().matrix()).camax() < 1e-15);
        assert!(rho.reduced(3).is_err());
    }
}
