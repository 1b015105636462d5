use super::state::{ChainState, Configuration};
use crate::thermo::PotentialSpec;

/// Largest admissible time step `0.1/ω_max`, with `ω_max² = 4 max V'' + max W''`
/// over the current configuration.
pub fn stability_bound(spec: &PotentialSpec, state: &ChainState) -> f64 {
    let n = state.n_sites();
    let mut v2 = spec.d2v(0.0).max(0.0);
    for x in 0..n {
        v2 = v2.max(spec.d2v(state.stretch(x)));
    }
    let mut w2 = spec.d2w(0.0).max(0.0);
    if let Configuration::Displacement(q) = &state.config {
        for &qx in q {
            w2 = w2.max(spec.d2w(qx));
        }
    }
    let omega = (4.0 * v2 + w2).sqrt().max(1e-3);
    0.1 / omega
}
