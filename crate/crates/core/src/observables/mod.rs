//! Measurements on chain states and trajectories: energy profiles, current
//! correlations, Green-Kubo conductivity and the Wigner distribution.

mod correlation;
mod green_kubo;
mod profile;
mod wigner;

pub use correlation::{
    current_autocorrelation, current_series, energy_susceptibility, equilibrium_state,
    lagged_products, CorrelationConfig, CorrelationMeta, CorrelationSeries,
};
pub use green_kubo::{green_kubo, ChiMode, GreenKuboEstimate, SATURATION_TOLERANCE};
pub use profile::empirical_energy_profile;
pub use wigner::{
    lattice_frequency, mode_amplitudes, state_from_amplitudes, wigner_from_amplitudes,
    wigner_transform, WignerConfig, WignerField,
};
