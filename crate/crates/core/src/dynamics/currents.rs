use super::state::{ChainState, Configuration};
use crate::error::{Error, Result};
use crate::thermo::PotentialSpec;

/// Per-site energies.
///
/// Unpinned: `E_x = p_x²/2 + (V(r_{x-1}) + V(r_x))/2`.
/// Pinned: `E_x = p_x²/2 + V(q_{x+1} − q_x) + W(q_x)`.
pub fn energy_field(state: &ChainState, spec: &PotentialSpec) -> Vec<f64> {
    let n = state.n_sites();
    let p = &state.momenta;
    match &state.config {
        Configuration::Stretch(r) => (0..n)
            .map(|x| {
                let left = r[(x + n - 1) % n];
                0.5 * p[x] * p[x] + 0.5 * (spec.v(left) + spec.v(r[x]))
            })
            .collect(),
        Configuration::Displacement(q) => (0..n)
            .map(|x| 0.5 * p[x] * p[x] + spec.v(q[(x + 1) % n] - q[x]) + spec.w(q[x]))
            .collect(),
    }
}

/// Total energy `H` evaluated directly.
pub fn total_energy(state: &ChainState, spec: &PotentialSpec) -> f64 {
    let n = state.n_sites();
    let kinetic: f64 = state.momenta.iter().map(|p| 0.5 * p * p).sum();
    let bonds: f64 = (0..n).map(|x| spec.v(state.stretch(x))).sum();
    let pinning: f64 = match &state.config {
        Configuration::Stretch(_) => 0.0,
        Configuration::Displacement(q) => q.iter().map(|q| spec.w(*q)).sum(),
    };
    kinetic + bonds + pinning
}

fn require_stretch(state: &ChainState) -> Result<&[f64]> {
    match &state.config {
        Configuration::Stretch(r) => Ok(r),
        Configuration::Displacement(_) => Err(Error::Unsupported(
            "bond currents are defined for the stretch representation".into(),
        )),
    }
}

/// Energy current on bond `(x, x+1)`: `(antisymmetric, stochastic)` parts.
///
/// `j^a = −(p_x + p_{x+1}) V'(r_x)/2` and `j^s = −(γ/6)(φ_{x+1} − φ_x)` with
/// `φ_x = p_{x+1}² + 4p_x² + p_{x-1}² + p_{x+1}p_{x-1} − 2p_{x+1}p_x − 2p_x p_{x-1}`.
/// With these, `L E_x = j_{x-1,x} − j_{x,x+1}`.
pub fn energy_current(
    state: &ChainState,
    spec: &PotentialSpec,
    gamma: f64,
) -> Result<Vec<(f64, f64)>> {
    let r = require_stretch(state)?;
    let p = &state.momenta;
    let n = p.len();
    let phi = |x: usize| {
        let (pm, p0, pp) = (p[(x + n - 1) % n], p[x], p[(x + 1) % n]);
        pp * pp + 4.0 * p0 * p0 + pm * pm + pp * pm - 2.0 * pp * p0 - 2.0 * p0 * pm
    };
    Ok((0..n)
        .map(|x| {
            let xp = (x + 1) % n;
            let a = -0.5 * (p[x] + p[xp]) * spec.dv(r[x]);
            let s = -gamma / 6.0 * (phi(xp) - phi(x));
            (a, s)
        })
        .collect())
}

/// Momentum current on bond `(x, x+1)`:
/// `V'(r_x) + (γ/6)(g_{x+1} − g_x)` with `g_x = 4p_x + p_{x-1} + p_{x+1}`,
/// so that `L p_x = j_{x,x+1} − j_{x-1,x}`.
pub fn momentum_current(state: &ChainState, spec: &PotentialSpec, gamma: f64) -> Result<Vec<f64>> {
    let r = require_stretch(state)?;
    let p = &state.momenta;
    let n = p.len();
    let g = |x: usize| 4.0 * p[x] + p[(x + n - 1) % n] + p[(x + 1) % n];
    Ok((0..n)
        .map(|x| spec.dv(r[x]) + gamma / 6.0 * (g((x + 1) % n) - g(x)))
        .collect())
}

/// `Σ_x −(p_x + p_{x+1}) V'(r_x)/2` with `r_x = q_{x+1} − q_x` in the pinned
/// representation: the total Hamiltonian energy current.
pub fn total_hamiltonian_current(state: &ChainState, spec: &PotentialSpec) -> f64 {
    let n = state.n_sites();
    let p = &state.momenta;
    let mut acc = 0.0;
    for x in 0..n - 1 {
        acc += (p[x] + p[x + 1]) * spec.dv(state.stretch(x));
    }
    acc += (p[n - 1] + p[0]) * spec.dv(state.stretch(n - 1));
    -0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::Pinning;

    fn sample_state(pinned: bool) -> ChainState {
        let p = vec![0.3, -1.1, 0.7, 0.2, -0.4, 0.9];
        let c = vec![0.5, -0.2, 0.1, 0.8, -0.6, 0.05];
        let config = if pinned {
            Configuration::Displacement(c)
        } else {
            Configuration::Stretch(c)
        };
        ChainState::new(p, config).unwrap()
    }

    #[test]
    fn energy_field_sums_to_hamiltonian() {
        let spec = PotentialSpec::fpu(1.0, 0.4, 0.9);
        let s = sample_state(false);
        let e: f64 = energy_field(&s, &spec).iter().sum();
        assert!((e - total_energy(&s, &spec)).abs() < 1e-12 * e.abs());
        let pinned = spec.with_pinning(Pinning::Quartic { nu: 1.2, g: 0.3 });
        let s = sample_state(true);
        let e: f64 = energy_field(&s, &pinned).iter().sum();
        assert!((e - total_energy(&s, &pinned)).abs() < 1e-12 * e.abs());
    }

    #[test]
    fn current_special_cases() {
        let spec = PotentialSpec::harmonic(1.0);
        let mut s = sample_state(false);
        s.momenta.iter_mut().for_each(|p| *p = 0.0);
        assert!(energy_current(&s, &spec, 1.0)
            .unwrap()
            .iter()
            .all(|(a, _)| *a == 0.0));
        s.momenta.iter_mut().for_each(|p| *p = 1.3);
        assert!(energy_current(&s, &spec, 1.0)
            .unwrap()
            .iter()
            .all(|(_, b)| b.abs() < 1e-14));
        let j = momentum_current(&s, &spec, 0.0).unwrap();
        for (x, jx) in j.iter().enumerate() {
            assert_eq!(*jx, s.stretch(x));
        }
        assert!(energy_current(&sample_state(true), &spec, 1.0).is_err());
    }

    #[test]
    fn hamiltonian_continuity() {
        // dE_x/dt under the deterministic flow equals j_{x-1,x} − j_{x,x+1}.
        let spec = PotentialSpec::fpu(1.0, 0.5, 1.0);
        let s = sample_state(false);
        let n = s.n_sites();
        let r = s.config.values();
        let p = &s.momenta;
        let j = energy_current(&s, &spec, 0.0).unwrap();
        for x in 0..n {
            let (xm, xp) = ((x + n - 1) % n, (x + 1) % n);
            let pdot = spec.dv(r[x]) - spec.dv(r[xm]);
            let rdot_x = p[xp] - p[x];
            let rdot_m = p[x] - p[xm];
            let edot = p[x] * pdot + 0.5 * (spec.dv(r[xm]) * rdot_m + spec.dv(r[x]) * rdot_x);
            assert!((edot - (j[xm].0 - j[x].0)).abs() < 1e-13);
        }
        let total: f64 = j.iter().map(|(a, _)| a).sum();
        assert!((total - total_hamiltonian_current(&s, &spec)).abs() < 1e-13);
    }
}
