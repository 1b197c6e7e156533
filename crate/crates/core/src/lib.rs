//! Simulation and verification laboratory for the porous medium equation
//! `∂ₜu = Δuᵐ` in the exterior of a hole in the plane.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: holes and the grids that discretize their exterior;
//! * [`stationary`]: the logarithmic harmonic potential `φ` of the hole;
//! * [`special`]: Barenblatt profiles, the critical outer profile and the dipole;
//! * [`solver`]: conservative explicit finite volumes with run diagnostics;
//! * [`asymptotics`]: predicted profiles and error functionals;
//! * [`comparison`]: explicit super- and subsolutions and their checks;
//! * [`harness`]: configuration, orchestration and persistence.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod comparison;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod solver;
pub mod special;
pub mod stationary;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/special.md")]
    mod special {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
}
