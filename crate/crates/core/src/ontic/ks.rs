use std::f64::consts::FRAC_1_PI;

use serde::Serialize;

use super::{
    classical_trace_distance, OnticDensity, OnticPoint, ResponseFunction, Result, SphereGrid,
};
use crate::quantum::PureState;

/// Kochen–Specker density `μ_ψ(λ) = (1/π)(ψ̂·λ) Θ(ψ̂·λ)`: a cosine lobe on the
/// hemisphere centred on the Bloch vector `ψ̂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsDensity {
    state: PureState,
    direction: [f64; 3],
}

impl KsDensity {
    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn direction(&self) -> &[f64; 3] {
        &self.direction
    }
}

impl OnticDensity for KsDensity {
    fn density(&self, lambda: &OnticPoint) -> f64 {
        lambda.dot(&self.direction).max(0.0) * FRAC_1_PI
    }

    fn max_density(&self) -> f64 {
        FRAC_1_PI
    }
}

pub fn ks_density(psi: &PureState) -> Result<KsDensity> {
    let direction = psi.bloch_vector()?;
    Ok(KsDensity {
        state: psi.clone(),
        direction,
    })
}

/// Two-outcome projective measurement `{|n⟩, |n⊥⟩}` answered deterministically
/// by the hemisphere rule `ξ(0|λ) = Θ(n̂·λ)`. Equator ties go to outcome 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsResponse {
    direction: [f64; 3],
}

impl KsResponse {
    pub fn direction(&self) -> &[f64; 3] {
        &self.direction
    }
}

impl ResponseFunction for KsResponse {
    fn outcomes(&self) -> usize {
        2
    }

    fn probability(&self, outcome: usize, lambda: &OnticPoint) -> f64 {
        let first = if lambda.dot(&self.direction) >= 0.0 {
            1.0
        } else {
            0.0
        };
        match outcome {
            0 => first,
            1 => 1.0 - first,
            _ => 0.0,
        }
    }
}

/// Response for the measurement whose first outcome projects onto `basis_vector`.
pub fn ks_response(basis_vector: &PureState) -> Result<KsResponse> {
    Ok(KsResponse {
        direction: basis_vector.bloch_vector()?,
    })
}

/// `D(μ_a, μ_b)` for two states whose Bloch vectors are `theta` apart. The
/// quantum value is `sin(θ/2)`.
pub fn ks_distance_at_angle(theta: f64, grid: &SphereGrid) -> Result<f64> {
    let a = ks_density(&PureState::from_bloch([0.0, 0.0, 1.0])?)?;
    let b = ks_density(&PureState::from_bloch([theta.sin(), 0.0, theta.cos()])?)?;
    Ok(classical_trace_distance(&a, &b, grid))
}
