//! Phonon kinetics: dispersion relations, collision kernels, the mode-jump
//! process, the linear transport equation and scaling exponents.
//!
//! Velocities are `ω'(k)/(2π)` throughout, both in the transport equation
//! and for the jump-process position `Y(t)`.

mod dispersion;
mod exponent;
mod jump;
mod kernel;
mod transport;

pub use dispersion::DispersionSpec;
pub use exponent::{estimate_scaling_exponent, ExponentEstimate, ExponentMethod, MIN_TRAJECTORIES};
pub use jump::{
    sample_ensemble, sample_trajectory, Ensemble, InitialMode, PhononModel, PhononTrajectory,
    JUMP_TABLE_POINTS,
};
pub use kernel::{KernelSpec, TabulatedKernel};
pub use transport::{solve_transport, TransportField, TransportSolver};
