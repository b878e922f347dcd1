use std::f64::consts::PI;

use rayon::prelude::*;

use super::{OnticError, OnticPoint, Result};

/// Default node count for single-sphere integrals.
pub const DEFAULT_RESOLUTION: usize = 2_000_000;

const CHUNK: usize = 1 << 14;

/// Equal-weight quadrature on the unit sphere built from a Fibonacci lattice.
///
/// Node `i` of `N` sits at height `z = 1 − (2i + 1)/N` and longitude
/// `i · π(3 − √5)`; each carries weight `4π/N`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    nodes: Vec<OnticPoint>,
    weight: f64,
}

impl SphereGrid {
    pub fn fibonacci(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(OnticError::EmptyGrid);
        }
        let golden_angle = PI * (3.0 - 5f64.sqrt());
        let nodes = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let (s, c) = (golden_angle * i as f64).sin_cos();
                OnticPoint::from_unit_unchecked([r * c, r * s, z])
            })
            .collect();
        Ok(Self {
            nodes,
            weight: 4.0 * PI / n as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn nodes(&self) -> &[OnticPoint] {
        &self.nodes
    }

    /// `∫ f dΩ`. Chunks are summed in parallel and merged in index order, so
    /// the result does not depend on the thread count.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&OnticPoint) -> f64 + Sync,
    {
        let partials: Vec<f64> = self
            .nodes
            .par_chunks(CHUNK)
            .map(|chunk| chunk.iter().map(&f).sum::<f64>())
            .collect();
        partials.iter().sum::<f64>() * self.weight
    }

    /// Values of `f` at every node, in node order.
    pub fn evaluate<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&OnticPoint) -> f64 + Sync + Send,
    {
        self.nodes.par_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_constants() {
        for n in [1, 17, 1000, 123_457] {
            let g = SphereGrid::fibonacci(n).unwrap();
            assert!((g.weight() * g.len() as f64 - 4.0 * PI).abs() < 1e-8);
            assert!((g.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-8);
        }
        assert!(matches!(
            SphereGrid::fibonacci(0),
            Err(OnticError::EmptyGrid)
        ));
    }

    #[test]
    fn nodes_on_sphere() {
        let g = SphereGrid::fibonacci(5000).unwrap();
        for p in g.nodes() {
            assert!((p.dot(p.coords()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn low_moments() {
        let g = SphereGrid::fibonacci(100_000).unwrap();
        // ∫ z² dΩ = 4π/3, ∫ x dΩ = 0
        assert!((g.integrate(|p| p.coords()[2].powi(2)) - 4.0 * PI / 3.0).abs() < 1e-6);
        assert!(g.integrate(|p| p.coords()[0]).abs() < 1e-6);
    }

    #[test]
    fn integration_is_reproducible() {
        let g = SphereGrid::fibonacci(300_001).unwrap();
        let f = |p: &OnticPoint| (p.coords()[0] * 3.0).sin().abs();
        let a = g.integrate(f);
        let b = g.integrate(f);
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
