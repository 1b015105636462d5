//! Potentials, single-site partition function, entropy and pressure, and
//! equilibrium samplers.

mod legendre;
mod partition;
mod potential;
mod sampling;
mod table;

pub use legendre::{entropy, entropy_from, ThermoPoint};
pub use partition::{log_partition, site_moments, SiteMoments};
pub use potential::{Interaction, Pinning, PotentialSpec};
pub use sampling::{
    gibbs_sweeps, pressure_monte_carlo, sample_equilibrium, sample_gibbs_mcmc, sample_with,
    stretch_cdf, StretchSampler,
};
pub use table::{Field, Interpolation, ThermoTable};
