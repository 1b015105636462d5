//! Microscopic stochastic dynamics on a periodic chain.

mod currents;
mod integrator;
mod noise;
mod stability;
mod state;

pub use currents::{
    energy_current, energy_field, momentum_current, total_energy, total_hamiltonian_current,
};
pub use integrator::{evolve, hamiltonian_step, DynamicsParams, Observer, Splitting};
pub use noise::{noise_step, rotate_triple, NoiseStepPlan};
pub use stability::stability_bound;
pub use state::{ChainState, Configuration, ConservationReport};
