//! Action integrals of closed Hamiltonian loops on unitary coadjoint orbits.
//!
//! This crate computes the unit complex number attached to a closed loop of
//! Hamiltonian diffeomorphisms of an isospectral orbit of u(n): the
//! exponentiated action
//!
//! ```text
//! κ = exp( 2πi ∫_S ω  -  2πi ∫₀¹ f_t(γ(t)) dt ),
//! ```
//!
//! where γ is the trajectory of a point under the loop, S is any surface in
//! the orbit capping γ, ω is the orbit's symplectic form and f_t are the
//! Hamiltonians generating the loop. Integrality of the orbit's levels makes
//! κ independent of the choices, and the crate verifies this numerically: κ
//! is computed along three independent routes (surface quadrature, the
//! stabilizer character of the loop's endpoint, and Weyl characters at
//! regular torus elements) which must agree to tight tolerances.
//!
//! The main entry points are [`orbit::OrbitSpec`] for describing orbits,
//! [`isotopy::GeneratorPath`] for describing loops, and the `kappa` module
//! for the three routes and the verification bundles built on them.
//!
//! Sign conventions are global and recorded in [`SIGN_CONVENTION`]; see the
//! guide for the full discussion of orientations and pairings.

pub mod characters;
pub mod config;
pub mod error;
pub mod isotopy;
pub mod kappa;
pub mod lie;
pub mod loops;
pub mod orbit;

pub use config::{Numerics, Scheme, Tolerances};
pub use error::{Error, Result};
pub use kappa::{kappa_direct, kappa_fixed_point, kappa_report, kappa_stabilizer, kappa_weyl, KappaReport};

/// Global sign convention relating moment pairings to Hamiltonians:
/// `f_A(N) = SIGN_CONVENTION · Re tr(N·A)`.
///
/// With this choice (the moment map is ν ↦ -ν under the trace pairing), the
/// loop generated by the scalar path t ↦ e^{2πit}·I on an orbit with levels
/// m_j of multiplicities n_j has κ = e^{2πi·Σ m_j n_j}, i.e. central windings
/// count the total level positively. All reports embed this constant.
pub const SIGN_CONVENTION: f64 = -1.0;
