//! Overlap inequalities linking forbidden-outcome rates to classical trace
//! distances, and the ε threshold they imply when the classical distances are
//! assumed equal to the quantum ones.
//!
//! For the four product preparations `μ_A … μ_D` the chain is
//!
//! ```text
//! 4ε ≥ ω(μ_A,μ_B,μ_C,μ_D) ≥ ω(μ₀,μ₀′,μ₁,μ₁′)²
//! ω(μ₀′,μ₀,μ₁,μ₁′) ≥ ω(μ₀′,μ₀) + ω(μ₀,μ₁) + ω(μ₁,μ₁′) − 2
//! ω(μ,ν) = 1 − D(μ,ν)
//! ```
//!
//! which combines to `D(μ₀,μ₁) + D(μ₀,μ₀′) + D(μ₁,μ₁′) ≥ 1 − 2√ε`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ontic::{OnticDensity, SphereGrid};
use crate::protocol::{phi0, phi0_prime, phi1, phi1_prime};
use crate::quantum::quantum_trace_distance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("ε = {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error(
        "chain link `{link}` violated by {deficit:e} (tolerance {tolerance:e}); refine the grid"
    )]
    Unresolved {
        link: &'static str,
        deficit: f64,
        tolerance: f64,
    },
    #[error("weights and values differ in length ({weights} vs {values})")]
    LengthMismatch { weights: usize, values: usize },
}

pub type Result<T> = std::result::Result<T, BoundsError>;

/// `min(a,b,c,d) − [min(a,b) + min(b,c) + min(c,d) − b − c]`; never negative.
pub fn min4_lemma_gap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a.min(b).min(c).min(d) - (a.min(b) + b.min(c) + c.min(d) - b - c)
}

/// Right-hand side `1 − 2√ε` of the distance-sum inequality.
pub fn theorem_rhs(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(BoundsError::EpsilonOutOfRange(epsilon));
    }
    Ok(1.0 - 2.0 * epsilon.sqrt())
}

/// Quantum trace distances entering the threshold at crosstalk `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantumDistances {
    /// `D_Q(φ₀, φ₁)`
    pub d_0_1: f64,
    /// `D_Q(φ₀, φ₀′)`
    pub d_0_0p: f64,
    /// `D_Q(φ₁, φ₁′)`
    pub d_1_1p: f64,
}

impl QuantumDistances {
    pub fn at(kappa: f64) -> Self {
        let dq = |a, b| quantum_trace_distance(&a, &b).expect("single qubits");
        Self {
            d_0_1: dq(phi0(), phi1()),
            d_0_0p: dq(phi0(), phi0_prime(kappa)),
            d_1_1p: dq(phi1(), phi1_prime(kappa)),
        }
    }

    pub fn sum(&self) -> f64 {
        self.d_0_1 + self.d_0_0p + self.d_1_1p
    }
}

/// Smallest ε compatible with classical = quantum trace distances:
/// `max(0, (1 − S)/2)²` with `S` the quantum distance sum. Zero once `S ≥ 1`.
pub fn epsilon_threshold(kappa: f64) -> f64 {
    threshold_from_sum(QuantumDistances::at(kappa).sum())
}

fn threshold_from_sum(sum: f64) -> f64 {
    ((1.0 - sum) / 2.0).max(0.0).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub epsilon_mean: f64,
    pub rhs: f64,
    pub quantum_distance_sum: f64,
    pub epsilon_threshold: f64,
    /// The quantum distance sum falls below `1 − 2√ε`.
    pub violated: bool,
}

pub fn bound_report(epsilon_mean: f64, kappa: f64) -> Result<BoundReport> {
    let rhs = theorem_rhs(epsilon_mean)?;
    let sum = QuantumDistances::at(kappa).sum();
    Ok(BoundReport {
        epsilon_mean,
        rhs,
        quantum_distance_sum: sum,
        epsilon_threshold: threshold_from_sum(sum),
        violated: sum < rhs,
    })
}

/// One inequality `lhs ≥ rhs` of the proof chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl ChainLink {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: lhs - rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    /// `ω(μ_A, μ_B, μ_C, μ_D)` over the two-copy space.
    pub joint_overlap: f64,
    /// `ω(μ₀, μ₀′, μ₁, μ₁′)` on one copy.
    pub single_overlap: f64,
    /// `[ω(μ₀,μ₁), ω(μ₀,μ₀′), ω(μ₁,μ₁′)]`
    pub pair_overlaps: [f64; 3],
    /// `[D(μ₀,μ₁), D(μ₀,μ₀′), D(μ₁,μ₁′)]`
    pub distances: [f64; 3],
    pub links: Vec<ChainLink>,
    /// `ω_joint / 4`: the smallest mean forbidden rate this model allows.
    pub epsilon_lower_bound_joint: f64,
    /// `max(0, 1 − ΣD)² / 4`: the bound implied by the distances alone.
    pub epsilon_lower_bound_distances: f64,
}

/// Runs the chain on densities sampled at weighted nodes. `values[i]` holds
/// `(μ₀, μ₀′, μ₁, μ₁′)` at node `i`; the joint space uses the product weights.
pub fn overlap_chain(values: &[[f64; 4]], weights: &[f64], tolerance: f64) -> Result<ChainReport> {
    if values.len() != weights.len() {
        return Err(BoundsError::LengthMismatch {
            weights: weights.len(),
            values: values.len(),
        });
    }
    const M0: usize = 0;
    const M0P: usize = 1;
    const M1: usize = 2;
    const M1P: usize = 3;

    let integrate = |f: &dyn Fn(&[f64; 4]) -> f64| -> f64 {
        values.iter().zip(weights).map(|(v, w)| f(v) * w).sum()
    };
    let single_overlap = integrate(&|v| v.iter().copied().fold(f64::INFINITY, f64::min));
    let pairs = [(M0, M1), (M0, M0P), (M1, M1P)];
    let pair_overlaps = pairs.map(|(a, b)| integrate(&|v| v[a].min(v[b])));
    let distances = pairs.map(|(a, b)| 0.5 * integrate(&|v| (v[a] - v[b]).abs()));

    let partials: Vec<f64> = values
        .par_iter()
        .zip(weights.par_iter())
        .map(|(x, wx)| {
            let row: f64 = values
                .iter()
                .zip(weights)
                .map(|(y, wy)| {
                    let a = x[M0] * y[M0];
                    let b = x[M0P] * y[M1];
                    let c = x[M1] * y[M0P];
                    let d = x[M1P] * y[M1P];
                    a.min(b).min(c).min(d) * wy
                })
                .sum();
            row * wx
        })
        .collect();
    let joint_overlap: f64 = partials.iter().sum();

    let distance_sum: f64 = distances.iter().sum();
    let mut links: Vec<ChainLink> = ["mass_0", "mass_0p", "mass_1", "mass_1p"]
        .into_iter()
        .enumerate()
        .map(|(k, name)| ChainLink::new(name, -(integrate(&|v| v[k]) - 1.0).abs(), 0.0))
        .collect();
    links.extend([
        ChainLink::new("product_overlap", joint_overlap, single_overlap.powi(2)),
        ChainLink::new(
            "four_to_two_overlaps",
            single_overlap,
            pair_overlaps.iter().sum::<f64>() - 2.0,
        ),
        ChainLink::new(
            "distance_sum",
            joint_overlap.max(0.0).sqrt(),
            1.0 - distance_sum,
        ),
    ]);
    for (k, name) in [
        "overlap_distance_0_1",
        "overlap_distance_0_0p",
        "overlap_distance_1_1p",
    ]
    .into_iter()
    .enumerate()
    {
        // Equality: checked in both directions.
        let diff = pair_overlaps[k] + distances[k] - 1.0;
        links.push(ChainLink::new(name, -diff.abs(), 0.0));
    }

    if let Some(bad) = links.iter().find(|l| l.slack < -tolerance) {
        return Err(BoundsError::Unresolved {
            link: bad.name,
            deficit: -bad.slack,
            tolerance,
        });
    }

    Ok(ChainReport {
        joint_overlap,
        single_overlap,
        pair_overlaps,
        distances,
        links,
        epsilon_lower_bound_joint: joint_overlap / 4.0,
        epsilon_lower_bound_distances: (1.0 - distance_sum).max(0.0).powi(2) / 4.0,
    })
}

/// Evaluates four single-qubit densities on `grid` and runs [`overlap_chain`]
/// with the two-copy integral taken over the product grid. Cost grows as the
/// square of the node count; a few thousand nodes is typical.
///
/// Each sampled density is rescaled to unit mass on the grid, so the chain is
/// checked for an exact discrete model rather than inheriting quadrature error.
pub fn overlap_chain_check(
    mu0: &dyn OnticDensity,
    mu0p: &dyn OnticDensity,
    mu1: &dyn OnticDensity,
    mu1p: &dyn OnticDensity,
    grid: &SphereGrid,
    tolerance: f64,
) -> Result<ChainReport> {
    let mut values: Vec<[f64; 4]> = grid
        .nodes()
        .iter()
        .map(|l| {
            [
                mu0.density(l),
                mu0p.density(l),
                mu1.density(l),
                mu1p.density(l),
            ]
        })
        .collect();
    let weights = vec![grid.weight(); grid.len()];
    for k in 0..4 {
        let mass: f64 = values.iter().map(|v| v[k]).sum::<f64>() * grid.weight();
        if mass > 0.0 {
            values.iter_mut().for_each(|v| v[k] /= mass);
        }
    }
    overlap_chain(&values, &weights, tolerance)
}

/// Survival test for unequal qubits:
/// `max(0, 1−Σa) · max(0, 1−Σb) ≤ 4ε`, where `a` and `b` are each system's
/// three classical distances. `false` means the distances contradict the data.
pub fn nonidentical_bound(distances_a: [f64; 3], distances_b: [f64; 3], epsilon: f64) -> bool {
    nonidentical_product(distances_a, distances_b) <= 4.0 * epsilon
}

/// `max(0, 1−Σa) · max(0, 1−Σb)`; a lower bound on the joint overlap.
pub fn nonidentical_product(distances_a: [f64; 3], distances_b: [f64; 3]) -> f64 {
    let factor = |d: [f64; 3]| (1.0 - d.iter().sum::<f64>()).max(0.0);
    factor(distances_a) * factor(distances_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontic::{ks_density, KsDensity};
    use crate::quantum::PureState;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn lemma_examples() {
        assert_eq!(min4_lemma_gap(1.0, 1.0, 1.0, 1.0), 0.0);
        assert!((min4_lemma_gap(0.2, 0.5, 0.3, 0.9) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(theorem_rhs(0.0).unwrap(), 1.0);
        assert!((theorem_rhs(0.0114).unwrap() - 0.78646).abs() < 1e-5);
        assert!(theorem_rhs(0.25).unwrap().abs() < 1e-15);
        assert!(matches!(
            theorem_rhs(1.5),
            Err(BoundsError::EpsilonOutOfRange(_))
        ));
        assert!(theorem_rhs(-0.1).is_err());
        for eps in [0.0, 0.001, 0.3, 1.0] {
            assert!((theorem_rhs(eps).unwrap() + 2.0 * eps.sqrt() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn threshold_examples() {
        assert!((epsilon_threshold(0.01) - 0.0183).abs() < 5e-4);
        let ideal = ((1.0 - FRAC_1_SQRT_2) / 2.0).powi(2);
        assert!((epsilon_threshold(0.0) - ideal).abs() < 1e-14);
        assert!((epsilon_threshold(0.0) - 0.02145).abs() < 1e-5);
        assert!(QuantumDistances::at(0.2).sum() > 1.0);
        assert_eq!(epsilon_threshold(0.2), 0.0);
    }

    #[test]
    fn threshold_decreasing() {
        let mut prev = f64::INFINITY;
        for step in 0..=500 {
            let t = epsilon_threshold(step as f64 * 1e-4);
            assert!(t < prev);
            assert!((prev - t).abs() < 1e-3 || step == 0);
            prev = t;
        }
    }

    #[test]
    fn report_verdict_tracks_threshold() {
        for eps in [0.0, 0.005, 0.0114, 0.0183, 0.0184, 0.05, 0.25] {
            let r = bound_report(eps, 0.01).unwrap();
            assert_eq!(r.violated, eps < r.epsilon_threshold, "ε={eps}");
            assert!(r.rhs <= 1.0);
        }
        let vacuous = bound_report(0.0, 0.3).unwrap();
        assert_eq!(vacuous.epsilon_threshold, 0.0);
        assert!(!vacuous.violated);
    }

    #[test]
    fn nonidentical_examples() {
        assert!(!nonidentical_bound([0.0; 3], [0.0; 3], 0.0114));
        let q = QuantumDistances::at(0.01);
        let d = [q.d_0_1, q.d_0_0p, q.d_1_1p];
        let p = nonidentical_product(d, d);
        assert!((1.0 - q.sum() - 0.270_68).abs() < 1e-5);
        assert!((p - 0.073_268).abs() < 1e-6);
        assert!((p / 4.0 - epsilon_threshold(0.01)).abs() < 1e-15);
        assert!(!nonidentical_bound(d, d, 0.0114));
        assert!(nonidentical_bound(d, d, 0.0184));
        assert!(nonidentical_bound([0.5, 0.5, 0.1], [0.0; 3], 0.0));
        assert!(nonidentical_bound([0.0; 3], [0.4, 0.4, 0.4], 0.0));
    }

    fn ks(v: [f64; 3]) -> KsDensity {
        ks_density(&PureState::from_bloch(v).unwrap()).unwrap()
    }

    #[test]
    fn chain_identical_densities() {
        let grid = SphereGrid::fibonacci(1500).unwrap();
        let mu = ks([0.1, 0.2, 0.9]);
        let r = overlap_chain_check(&mu, &mu, &mu, &mu, &grid, 1e-6).unwrap();
        assert!((r.joint_overlap - 1.0).abs() < 1e-6);
        for link in &r.links {
            assert!(link.slack.abs() < 1e-6, "{link:?}");
        }
    }

    #[test]
    fn chain_disjoint_supports() {
        let grid = SphereGrid::fibonacci(1500).unwrap();
        let up = ks([0.0, 0.0, 1.0]);
        let down = ks([0.0, 0.0, -1.0]);
        let r = overlap_chain_check(&up, &down, &up, &down, &grid, 1e-6).unwrap();
        assert!(r.single_overlap.abs() < 1e-12);
        assert!(r.links.iter().all(|l| l.slack >= -1e-6));
    }

    #[test]
    fn chain_rejects_inconsistent_input() {
        // Unnormalised "densities" fail the mass links.
        let values = vec![[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]];
        let weights = vec![1.0, 1.0];
        let r = overlap_chain(&values, &weights, 1e-9);
        assert!(r.is_ok());
        let values = vec![[2.0, 2.0, 0.1, 2.0]];
        let r = overlap_chain(&values, &[1.0], 1e-9);
        assert!(matches!(
            r,
            Err(BoundsError::Unresolved { link: "mass_0", .. })
        ));
        assert!(matches!(
            overlap_chain(&values, &[1.0, 1.0], 1e-9),
            Err(BoundsError::LengthMismatch { .. })
        ));
    }
}
