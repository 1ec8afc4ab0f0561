//! Finite, certified constructions around subgroup separability.
//!
//! * [`group`]: marked groups with solvable word problem (free groups,
//!   `BS(1,n)`, free products) and their normal forms.
//! * [`stallings`]: folded subgroup graphs of free groups and Hall completion
//!   to finite-index coset tables.
//! * [`chabauty`]: basic open sets of the space of subgroups and the
//!   approximation of subgroups by finite-index ones.
//! * [`actions`]: permutation actions on `ℕ` as expression trees, orbits,
//!   stabilizer windows, traces and the approximation constructions.
//! * [`amenability`]: exact Følner certificates, Følner search, the
//!   free-product surgery, and the `BS(1,n)` non-separability witness.
//! * [`genericity`]: finite fusion runs threading dense-set providers through
//!   nested basic open sets.

pub mod error;
pub mod group;
pub mod stallings;
pub mod chabauty;
pub mod actions;
pub mod amenability;
pub mod genericity;

pub use error::{Error, Refusal, Result};
