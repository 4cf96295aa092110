//! Exact computation of the weak-closure structure of the powers of the
//! Koopman operator of Chacon's classical automorphism.
//!
//! The transformation is represented as an integral automorphism over the
//! 3-adic odometer. Everything measurable is computed in exact rational
//! arithmetic: the distributions of the cocycle's Birkhoff sums and their
//! generating polynomials ([`polyengine`], cross-checked against the
//! brute-force odometer oracle in [`triadic`]), correlations inside the
//! Rokhlin towers ([`towers`]), the total-variation functional driving
//! convergence to the ortho-projector ([`analysis`]), and the
//! classification of integer sequences by their limit operators
//! ([`weaklimits`]). The [`verify`] module bundles the full invariant
//! suites behind stable names.
//!
//! Enumeration loops run data-parallel under the default `parallel`
//! feature and fall back to plain sequential iteration without it; both
//! paths reduce with exact, associative arithmetic and produce identical
//! results.

pub mod analysis;
pub mod config;
pub mod error;
mod exec;
pub mod mass;
pub mod polyengine;
pub mod towers;
pub mod triadic;
pub mod verify;
pub mod weaklimits;

pub use config::Budgets;
pub use error::{Error, Result};
pub use mass::MassFunction;
