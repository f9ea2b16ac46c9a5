//! Numerical core for supercritical Hardy–Sobolev inequalities with a
//! logarithmic term on weighted radial Sobolev spaces.
//!
//! Everything here is pure computation over `f64` and `alloc` vectors, so the
//! crate builds under `no_std`. File formats, configuration and the command
//! line live in the companion `loghardy` crate.
//!
//! Module map:
//!
//! * [`params`]: admissible parameter tuples and the derived Bliss constants.
//! * [`radial`]: graded grids, piecewise-linear profiles, weighted quadrature
//!   and the Dirichlet norm.
//! * [`functionals`]: the log-perturbed functional, the energy and its
//!   derivative pairing.
//! * [`bliss`]: extremal profiles, cutoff bubbles and the best constants.
//! * [`analysis`]: constrained maximization, rate fits, concentration checks
//!   and the mountain-pass level.
//! * [`shooting`]: the radial boundary-value problem solved by shooting.
//! * [`orlicz`]: Young functions and the Luxemburg norm.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod bliss;
mod error;
pub mod functionals;
pub mod math;
pub mod orlicz;
pub mod params;
pub mod quad;
pub mod radial;
pub mod shooting;

pub use error::{Error, Result};
pub use params::{DerivedConstants, ParamSet};
pub use radial::{Grid, Profile};
