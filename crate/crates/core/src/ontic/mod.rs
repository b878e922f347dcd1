//! Ontological models over the Bloch sphere.
//!
//! A model assigns each quantum state a probability density `μ_ψ(λ)` over
//! ontic states `λ ∈ S²` and each measurement a response function
//! `ξ(k|M, λ)`. Densities are closed-form functions; resolution belongs to
//! the [`SphereGrid`] used to integrate them.

mod grid;
mod ks;
mod sampling;

pub use grid::{SphereGrid, DEFAULT_RESOLUTION};
pub use ks::{ks_density, ks_distance_at_angle, ks_response, KsDensity, KsResponse};
pub use sampling::sample_ontic;

use serde::Serialize;
use thiserror::Error;

use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OnticError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("ontic point is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("grid needs at least one node")]
    EmptyGrid,
    #[error("k-overlap needs at least two densities, got {0}")]
    TooFewDensities(usize),
}

pub type Result<T> = std::result::Result<T, OnticError>;

/// A point `λ` on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[repr(transparent)]
pub struct OnticPoint([f64; 3]);

impl OnticPoint {
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if (norm - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(OnticError::NotUnit(norm));
        }
        Ok(Self(v))
    }

    /// Rescales a non-zero vector onto the sphere.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(OnticError::NotUnit(norm));
        }
        Ok(Self(v.map(|c| c / norm)))
    }

    pub(crate) fn from_unit_unchecked(v: [f64; 3]) -> Self {
        Self(v)
    }

    pub fn coords(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        dot(&self.0, v)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Probability density `μ(λ)` over the sphere (with respect to solid angle).
pub trait OnticDensity: Sync {
    fn density(&self, lambda: &OnticPoint) -> f64;

    /// Upper bound on the density; drives rejection sampling.
    fn max_density(&self) -> f64;
}

/// Response function `ξ(k|M, λ)` of a measurement with finitely many outcomes.
pub trait ResponseFunction: Sync {
    fn outcomes(&self) -> usize;

    fn probability(&self, outcome: usize, lambda: &OnticPoint) -> f64;
}

/// `∫ ξ(k|M, λ) μ(λ) dλ`.
pub fn outcome_probability(
    response: &dyn ResponseFunction,
    outcome: usize,
    mu: &dyn OnticDensity,
    grid: &SphereGrid,
) -> f64 {
    grid.integrate(|l| response.probability(outcome, l) * mu.density(l))
}

/// `D(μ₀, μ₁) = ½ ∫ |μ₀ − μ₁|`.
pub fn classical_trace_distance(
    mu0: &dyn OnticDensity,
    mu1: &dyn OnticDensity,
    grid: &SphereGrid,
) -> f64 {
    0.5 * grid.integrate(|l| (mu0.density(l) - mu1.density(l)).abs())
}

/// `ω(μ₁,…,μ_k) = ∫ minᵢ μᵢ`.
pub fn k_overlap(densities: &[&dyn OnticDensity], grid: &SphereGrid) -> Result<f64> {
    if densities.len() < 2 {
        return Err(OnticError::TooFewDensities(densities.len()));
    }
    Ok(grid.integrate(|l| {
        densities
            .iter()
            .map(|mu| mu.density(l))
            .fold(f64::INFINITY, f64::min)
    }))
}
