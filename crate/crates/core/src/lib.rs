//! Energy transport in one-dimensional oscillator chains with energy- and
//! momentum-conserving noise.
//!
//! The crate is organised by layer: [`thermo`] (potentials and equilibrium
//! thermodynamics), [`dynamics`] (the microscopic stochastic chain),
//! [`observables`] (profiles, current correlations, Green-Kubo, Wigner),
//! [`kinetics`] (phonon transport and its jump process), [`fracheat`]
//! (fractional heat equation and stable laws) and [`hydro`] (Euler system).

// `!(x > 0.0)` deliberately rejects NaN, and index loops mirror the stencils.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod fracheat;
pub mod hydro;
pub mod kinetics;
pub mod observables;
pub mod quadrature;
pub mod rng;
pub mod stats;
pub mod thermo;

pub use error::{Error, Result};
