use epistemic_core::protocol::{
    circuit_equivalence_tvd, total_variation, CrosstalkConfig, MeasurementCircuit,
};
use epistemic_core::quantum::{born_probabilities, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

#[test]
fn native_and_textbook_circuits_agree_on_product_states() {
    let hcz = MeasurementCircuit::Hcz.unitary();
    let ms = MeasurementCircuit::Ms.unitary();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let a = PureState::from_bloch(UnitSphere.sample(&mut rng)).unwrap();
        let b = PureState::from_bloch(UnitSphere.sample(&mut rng)).unwrap();
        let psi = a.tensor(&b).unwrap();
        let p = born_probabilities(&psi.apply(&hcz).unwrap());
        let q = born_probabilities(&psi.apply(&ms).unwrap());
        assert!(total_variation(&p, &q) <= 1e-10);
    }
    for kappa in [0.0, 0.01, 0.1] {
        assert!(circuit_equivalence_tvd(CrosstalkConfig::new(kappa).unwrap()) <= 1e-10);
    }
}
