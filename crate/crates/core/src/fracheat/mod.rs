//! Fractional heat equation on a periodic domain, symmetric α-stable laws,
//! and the comparison of kinetic profiles with the fractional limit.
//!
//! The periodic domain stands in for the line. Stable samples compared with
//! a periodic solution must be wrapped onto the same domain.

mod check;
mod solver;
mod stable;

pub use check::{kinetic_to_fractional_check, FracCheckReport, FracCheckRow, KineticProfile};
pub use solver::{FracHeatProblem, Profile};
pub use stable::{sample_stable, stable_cdf, stable_density, stable_tail_constant, stable_variate};
