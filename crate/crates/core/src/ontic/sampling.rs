use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use super::{OnticDensity, OnticPoint};

/// Draws `n` ontic states from `mu` by rejection against the uniform sphere.
/// The output is a pure function of `(seed, n)`.
pub fn sample_ontic(mu: &dyn OnticDensity, seed: u64, n: usize) -> Vec<OnticPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ceiling = mu.max_density();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: [f64; 3] = UnitSphere.sample(&mut rng);
        let lambda = OnticPoint::from_unit_unchecked(v);
        if rng.random::<f64>() * ceiling < mu.density(&lambda) {
            out.push(lambda);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontic::ks_density;
    use crate::quantum::PureState;

    #[test]
    fn mean_is_two_thirds_axis() {
        let psi = PureState::from_bloch([0.2, -0.7, 0.4]).unwrap();
        let mu = ks_density(&psi).unwrap();
        let axis = *mu.direction();
        let n = 1_000_000;
        let samples = sample_ontic(&mu, 42, n);
        for (k, &a) in axis.iter().enumerate() {
            let xs: Vec<f64> = samples.iter().map(|s| s.coords()[k]).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            let expected = 2.0 / 3.0 * a;
            assert!(
                (mean - expected).abs() < 3.0 * se,
                "axis {k}: {mean} vs {expected} (se {se})"
            );
        }
    }

    #[test]
    fn deterministic_and_supported() {
        let mu = ks_density(&PureState::from_bloch([1.0, 1.0, 0.0]).unwrap()).unwrap();
        let a = sample_ontic(&mu, 7, 5000);
        let b = sample_ontic(&mu, 7, 5000);
        assert_eq!(a, b);
        assert_ne!(a, sample_ontic(&mu, 8, 5000));
        assert!(a.iter().all(|l| l.dot(mu.direction()) >= 0.0));
        assert!(a.iter().all(|l| (l.dot(l.coords()) - 1.0).abs() < 1e-12));
    }
}
