//! Low-energy scattering parameters from the variable-phase (Calogero)
//! equations.
//!
//! The scattering-length function `a_l(k, r)` obeys a first-order Riccati
//! equation whose `r -> inf` limit is `-tan(delta_l)/k^(2l+1)`. This crate
//! integrates it (and the companion equations for the effective range and
//! shape parameter) on a compactified grid, fits the effective-range
//! expansion to low-k sweeps, and cross-checks everything against a direct
//! Numerov solution of the radial Schrodinger equation.

// `!(x > 0.0)` style checks are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
#[cfg(feature = "coulomb")]
pub mod coulomb;
pub mod ere;
mod error;
pub mod ode;
pub mod oracle;
pub mod potentials;
pub mod specfun;
pub mod vpa;

pub use error::{Error, Result};
pub use potentials::{Channel, JCoupling, ReducedPotential, UnitSystem};
pub use vpa::{VpaOptions, VpaProblem, VpaTrace};
