use crate::dynamics::{energy_field, ChainState};
use crate::thermo::PotentialSpec;

/// `ε Σ_x G(εx) E_x`, the energy profile tested against `G`.
pub fn empirical_energy_profile<G: Fn(f64) -> f64>(
    state: &ChainState,
    spec: &PotentialSpec,
    epsilon: f64,
    test_function: G,
) -> f64 {
    energy_field(state, spec)
        .iter()
        .enumerate()
        .map(|(x, e)| test_function(epsilon * x as f64) * e)
        .sum::<f64>()
        * epsilon
}
