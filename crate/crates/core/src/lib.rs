//! Simulation and analysis toolkit for the two-ion overlap test of
//! ψ-epistemic ontological models.
//!
//! The crate is split along the lines of the experiment itself:
//!
//! - [`quantum`]: exact one- and two-qubit quantum mechanics (states, the
//!   trapped-ion gate set, Born probabilities, trace distance).
//! - [`protocol`]: the four crosstalk-perturbed preparations, the entangled
//!   joint measurement and the resulting outcome-probability matrix.
//! - [`ontic`]: ontological-model machinery (densities over the Bloch sphere,
//!   response functions, overlaps, classical trace distance) and the
//!   Kochen–Specker qubit model.
//! - [`bounds`]: the overlap inequalities linking forbidden-outcome rates to
//!   classical trace distances, and the resulting ε threshold.
//! - [`experiment`]: finite-shot sampling, ε estimation, error propagation
//!   and significance against the threshold.

pub mod bounds;
pub mod experiment;
pub mod ontic;
pub mod protocol;
pub mod quantum;

pub use num_complex::Complex64;
