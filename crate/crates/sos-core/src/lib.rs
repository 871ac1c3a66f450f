//! Sum-of-squares estimation and certification toolkit.
//!
//! The crate is organized around three workflows:
//!
//! * **Estimation**: compile a polynomial system over hidden variables into a
//!   moment-matrix feasibility problem ([`moments`]), solve it with a
//!   dependency-free alternating-projection solver ([`sdpsolve`]), and round
//!   the resulting pseudoexpectation into an estimate ([`estimators`],
//!   [`jennrich`]).
//! * **Refutation**: spectral certificates that bound clique size, injective
//!   tensor norms, and satisfiable fractions of random 4-XOR instances
//!   ([`certificates`]); each method sits behind the [`certificates::Certifier`]
//!   trait and is selected by name at runtime.
//! * **Lower-bound experiments**: the planted-clique pseudocalibration
//!   construction with exact pseudomoment enumeration, Monte-Carlo Fourier
//!   oracles, and shape-matrix norm scans ([`pseudocal`]).
//!
//! [`polyring`] and [`tensors`] supply the shared substrate: sparse
//! quotient-aware polynomials and dense symmetric tensors with seeded
//! instance generators. [`oracles`] holds slow, independent reference
//! computations (exact max clique, exhaustive XOR optimum) used to check
//! certificate soundness.

pub mod certificates;
pub mod estimators;
pub mod jennrich;
pub mod moments;
pub mod oracles;
pub mod polyring;
pub mod pseudocal;
pub mod sdpsolve;
pub mod tensors;
