//! Numerical laboratory for traveling thrombin waves in a hierarchy of
//! blood-coagulation reaction-diffusion models.
//!
//! The hierarchy descends from a 14-component plasma kinetics model through
//! a six-component reduction, two- and one-equation caricatures, down to a
//! scalar bistable equation. The crate simulates ignition and propagation,
//! measures front speeds, locates and classifies spatially uniform
//! equilibria, brackets speeds with minimax profiles, and evaluates two
//! closed-form speed estimates (narrow reaction zone and piecewise-linear
//! kink).
//!
//! Entry points: [`params::Config`] for parameters, [`models::Model`] for
//! kinetics, [`run`] for end-to-end waves and sweeps, [`equilibria::classify`]
//! for stationary analysis.

// validation guards use `!(x > 0.0)` on purpose: the negation rejects NaN
// along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod io;
pub mod models;
pub mod params;
pub mod rdsolver;
pub mod run;
pub mod speed_formulas;
pub mod wavefront;

pub use error::{CoagError, Result};
