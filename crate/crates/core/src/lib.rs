//! Degenerate-viscosity Navier–Stokes quasi-solutions, porous-medium and
//! fast-diffusion Barenblatt profiles, and the vanishing-pressure limit.
//!
//! Everything is generic over [`Real`] (or [`Scalar`] for exact exponent
//! arithmetic); `f64` aliases are provided for convenience.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cns;
pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod exact;
pub mod pme;
mod quad;
pub mod quasi;
pub mod scalar;
pub mod viscosity;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

pub type Grid64 = discrete::Grid<f64>;
pub type DensityField64 = discrete::DensityField<f64>;
pub type VelocityField64 = discrete::VelocityField<f64>;
pub type ViscosityLaw64 = viscosity::ViscosityLaw<f64>;
pub type Barenblatt64 = exact::BarenblattSolution<f64>;
pub type Extinction64 = exact::ExtinctionSolution<f64>;
pub type ExactExponents = exact::ExponentSet<num_rational::Rational64>;
pub type PressureSpec64 = cns::PressureSpec<f64>;
pub type CnsState64 = cns::CnsState<f64>;
pub type Trajectory64 = pme::Trajectory<f64>;
