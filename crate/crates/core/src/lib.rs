//! Thermo-quantum diffusion of overdamped particles in periodic potentials.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds physical parameters, CODATA constants and the
//!   dimensionless groups every formula is written in;
//! * [`special_functions`] provides overflow-safe modified Bessel functions
//!   `I0` and `I1`;
//! * [`potentials`] defines the cosine and harmonic potentials, the
//!   quasi-equilibrium quantum potential, the tunnelling-corrected effective
//!   potential and the discrete Bohm operator;
//! * [`lifson_jackson`] computes effective diffusion coefficients by
//!   periodic quadrature, Bessel closed form and the Arrhenius asymptote;
//! * [`pde_solver`] integrates the semiclassical, quantum-temperature,
//!   zero-temperature Bohm and fourth-order evolution equations;
//! * [`gaussian_closure`] implements the zero-temperature dispersion laws;
//! * [`analysis`] fits MSD slopes and logarithmic laws to simulated series;
//! * [`cli`] is the command-line front end (`qdiff`).

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Published coefficients are kept digit for digit.
#![allow(clippy::excessive_precision)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod gaussian_closure;
pub mod lifson_jackson;
pub mod model;
pub mod parallel;
pub mod pde_solver;
pub mod potentials;
pub mod special_functions;

pub use error::{Error, Result};
