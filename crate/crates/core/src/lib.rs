//! Sequential posted pricing for K-unit auctions.
//!
//! A seller holds `K` identical copies of an item and posts take-it-or-leave-it
//! prices to `n` buyers in an order of its choosing. Buyer values are drawn
//! independently from known discrete distributions. This crate computes and
//! evaluates such mechanisms:
//!
//! * [`model`] - instances, schedules, decision trees, discretization.
//! * [`eval`] - exact and Monte-Carlo expected revenue, the two easy
//!   one-sided optimizations (ordering given prices, pricing given an order).
//! * [`lp`] - the LP relaxation solved by Lagrangian breakpoint search, the
//!   schedule built from it, and the `1 - K^K/(K! e^K)` guarantee constants.
//! * [`versiongap`] - the version-and-discount generalized assignment
//!   problem and its exact dynamic program.
//! * [`ptas_spm`] / [`ptas_aspm`] - configuration-enumeration search for
//!   near-optimal non-adaptive and adaptive mechanisms.
//! * [`oracles`] - exponential-time exact solvers used as ground truth.

pub mod error;
pub mod eval;
pub mod io;
pub mod lp;
pub mod model;
pub mod oracles;
pub mod ptas_aspm;
pub mod ptas_spm;
pub mod rational;
pub mod versiongap;

pub use error::{Error, Result};
pub use rational::Rat;
