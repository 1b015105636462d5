use super::noise::NoiseStepPlan;
use super::stability::stability_bound;
use super::state::{ChainState, Configuration};
use crate::error::{Error, Result};
use crate::thermo::PotentialSpec;
use rand::Rng;

/// Splitting order of the stochastic integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Half noise sweep, Verlet step, half noise sweep.
    #[default]
    Strang,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsParams {
    pub gamma: f64,
    pub dt: f64,
    pub scheme: Splitting,
}

impl DynamicsParams {
    pub fn new(gamma: f64, dt: f64) -> Self {
        Self {
            gamma,
            dt,
            scheme: Splitting::Strang,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }
}

/// Callback invoked during [`evolve`] every `stride` steps (and at step 0).
pub trait Observer {
    fn stride(&self) -> usize;
    fn observe(&mut self, step: u64, state: &ChainState, spec: &PotentialSpec) -> Result<()>;
}

/// One velocity-Verlet step of the Hamiltonian flow, in place.
pub fn hamiltonian_step(state: &mut ChainState, spec: &PotentialSpec, dt: f64) -> Result<()> {
    let h = 0.5 * dt;
    kick(state, spec, h);
    drift(state, dt);
    let check = kick(state, spec, h);
    state.time += dt;
    if !check.is_finite()
        || !state
            .config
            .values()
            .iter()
            .fold(0.0, |a, x| a + x)
            .is_finite()
    {
        return Err(Error::numerical(
            "non-finite forces in the Hamiltonian step",
            format!("t = {}, dt = {dt}", state.time),
        ));
    }
    Ok(())
}

/// `p += h F(config)`; returns a sum that is non-finite iff any force was.
#[inline]
fn kick(state: &mut ChainState, spec: &PotentialSpec, h: f64) -> f64 {
    let n = state.momenta.len();
    let p = &mut state.momenta;
    let mut check = 0.0;
    match &state.config {
        Configuration::Stretch(r) => {
            let mut prev = spec.dv(r[n - 1]);
            for x in 0..n {
                let cur = spec.dv(r[x]);
                let f = cur - prev;
                p[x] += h * f;
                check += f;
                prev = cur;
            }
        }
        Configuration::Displacement(q) => {
            let mut prev = spec.dv(q[0] - q[n - 1]);
            for x in 0..n {
                let next = if x + 1 == n { q[0] } else { q[x + 1] };
                let cur = spec.dv(next - q[x]);
                let f = cur - prev - spec.dw(q[x]);
                p[x] += h * f;
                check += f.abs();
                prev = cur;
            }
        }
    }
    check
}

#[inline]
fn drift(state: &mut ChainState, dt: f64) {
    let n = state.momenta.len();
    let p = &state.momenta;
    match &mut state.config {
        Configuration::Stretch(r) => {
            for x in 0..n - 1 {
                r[x] += dt * (p[x + 1] - p[x]);
            }
            r[n - 1] += dt * (p[0] - p[n - 1]);
        }
        Configuration::Displacement(q) => {
            for (qx, px) in q.iter_mut().zip(p) {
                *qx += dt * px;
            }
        }
    }
}

/// Integrates the stochastic dynamics up to `t_final` by Strang splitting.
///
/// Observers see the state at step 0 and after every multiple of their
/// stride. A final partial step is taken if `t_final − t` is not a multiple of
/// `dt`. With `γ = 0` no random numbers are drawn and the result is bitwise
/// equal to repeated [`hamiltonian_step`] calls.
pub fn evolve<R: Rng + ?Sized>(
    state: &mut ChainState,
    spec: &PotentialSpec,
    params: &DynamicsParams,
    t_final: f64,
    rng: &mut R,
    observers: &mut [&mut dyn Observer],
) -> Result<()> {
    params.validate()?;
    state.check_representation(spec)?;
    if t_final < state.time {
        return Err(Error::Config(format!(
            "t_final = {t_final} is before the current time {}",
            state.time
        )));
    }
    let bound = stability_bound(spec, state);
    if params.dt > bound {
        return Err(Error::Config(format!(
            "dt = {} exceeds the stability bound {bound:.4e}",
            params.dt
        )));
    }
    let dt = params.dt;
    let t0 = state.time;
    let span = t_final - t0;
    let tiny = 1e-9 * dt;
    let n_full = ((span + tiny) / dt).floor() as u64;
    let rest = span - n_full as f64 * dt;
    let mut half = NoiseStepPlan::new(state.n_sites(), params.gamma, 0.5 * dt);

    for o in observers.iter_mut() {
        o.observe(0, state, spec)?;
    }
    for step in 1..=n_full {
        half.apply(&mut state.momenta, rng);
        hamiltonian_step(state, spec, dt)?;
        half.apply(&mut state.momenta, rng);
        state.time = t0 + step as f64 * dt;
        for o in observers.iter_mut() {
            if step % o.stride().max(1) as u64 == 0 {
                o.observe(step, state, spec)?;
            }
        }
    }
    if rest > tiny {
        let mut part = NoiseStepPlan::new(state.n_sites(), params.gamma, 0.5 * rest);
        part.apply(&mut state.momenta, rng);
        hamiltonian_step(state, spec, rest)?;
        part.apply(&mut state.momenta, rng);
    }
    state.time = t_final;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::thermo::Pinning;

    #[test]
    fn rest_state_is_a_fixed_point() {
        for spec in [
            PotentialSpec::fpu(1.0, 0.5, 1.0),
            PotentialSpec::harmonic(1.0).with_pinning(Pinning::Quartic { nu: 1.0, g: 1.0 }),
        ] {
            let mut s = ChainState::at_rest(&spec, 8).unwrap();
            let s0 = s.clone();
            for _ in 0..100 {
                hamiltonian_step(&mut s, &spec, 0.01).unwrap();
            }
            assert_eq!(s.momenta, s0.momenta);
            assert_eq!(s.config, s0.config);
        }
    }

    #[test]
    fn verlet_is_time_reversible() {
        let spec = PotentialSpec::fpu(1.0, 0.7, 1.0);
        let mut s = ChainState::new(
            vec![0.3, -0.2, 0.5, 0.1, -0.7],
            Configuration::Stretch(vec![0.1, 0.2, -0.4, 0.3, -0.1]),
        )
        .unwrap();
        let s0 = s.clone();
        for _ in 0..1000 {
            hamiltonian_step(&mut s, &spec, 0.01).unwrap();
        }
        s.momenta.iter_mut().for_each(|p| *p = -*p);
        for _ in 0..1000 {
            hamiltonian_step(&mut s, &spec, 0.01).unwrap();
        }
        for (a, b) in s.momenta.iter().zip(&s0.momenta) {
            assert!((a + b).abs() < 1e-11);
        }
        for (a, b) in s.config.values().iter().zip(s0.config.values()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_unstable_dt_and_wrong_representation() {
        let spec = PotentialSpec::harmonic(1.0);
        let mut s = ChainState::at_rest(&spec, 8).unwrap();
        let mut rng = stream(0, 0);
        assert!(evolve(
            &mut s,
            &spec,
            &DynamicsParams::new(1.0, 0.2),
            1.0,
            &mut rng,
            &mut []
        )
        .is_err());
        let pinned = spec.with_pinning(Pinning::Quadratic { nu: 1.0 });
        assert!(evolve(
            &mut s,
            &pinned,
            &DynamicsParams::new(1.0, 0.01),
            1.0,
            &mut rng,
            &mut []
        )
        .is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let spec = PotentialSpec::fpu(1.0, 0.0, 1.0);
        let mut s = ChainState::new(
            vec![0.0; 3],
            Configuration::Stretch(vec![1e120, 0.0, -1e120]),
        )
        .unwrap();
        let e = hamiltonian_step(&mut s, &spec, 0.01).unwrap_err();
        assert!(e.is_numerical());
    }
}
