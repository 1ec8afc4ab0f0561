//! Permutation actions of marked groups on `ℕ`.
//!
//! [`ActionExpr`] is a closed algebra of actions with total, exact
//! evaluation. Around it sit orbit exploration, stabilizer windows, traces,
//! the basic open sets [`ActionConstraint`], and the approximation
//! constructions: fixed-point augmentation, finite-orbit approximation through
//! a finite-index stabilizer, finitely supported approximation of permutation
//! windows, and transitive extension for `F_∞`.

mod approx;
mod constraint;
mod encode;
mod expr;
mod orbit;
mod perm;
mod schreier;

pub use approx::{
    approximate_finite_orbits, augment_fixed_point, augment_fixed_points, augment_with_cutoff, finite_orbit_approximation,
    orbit_window, stabilizer_approximation, transitive_extension, Augmented, FiniteOrbitApprox, OrbitWindow,
    Placement,
};
pub use constraint::{ActionConstraint, Violation};
pub use encode::{decode_n_adic, encode_n_adic, unzigzag, zigzag};
pub use expr::{Action, ActionExpr, Bijection, EmbeddedTable};
pub use orbit::{orbit, orbit_words, reaching_words, stabilizer_window, trace, Orbit, Trace};
pub use perm::{finite_support_approx, Perm, PermWindow};
