#![allow(clippy::needless_range_loop)]

use chainlab::dynamics::*;
use chainlab::rng::stream;
use chainlab::stats::mean_stderr;
use chainlab::thermo::{sample_equilibrium, Pinning, PotentialSpec};
use rand::Rng;
use std::f64::consts::PI;

fn random_state(spec: &PotentialSpec, n: usize, seed: u64) -> ChainState {
    let mut rng = stream(seed, 0);
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let config = if spec.is_pinned() {
        Configuration::Displacement(c)
    } else {
        Configuration::Stretch(c)
    };
    ChainState::new(p, config).unwrap()
}

#[test]
fn noise_sweep_conserves_momentum_and_kinetic_energy() {
    for (seed, gamma) in [(1, 0.1), (2, 1.0), (3, 50.0)] {
        let mut rng = stream(seed, 1);
        let mut p: Vec<f64> = (0..37).map(|_| rng.random_range(-100.0..100.0)).collect();
        let (s0, q0) = (p.iter().sum::<f64>(), p.iter().map(|v| v * v).sum::<f64>());
        let scale = p.iter().map(|v| v.abs()).sum::<f64>();
        for _ in 0..10 {
            noise_step(&mut p, gamma, 0.05, &mut rng);
        }
        let (s1, q1) = (p.iter().sum::<f64>(), p.iter().map(|v| v * v).sum::<f64>());
        assert!((s1 - s0).abs() <= 1e-12 * scale);
        assert!((q1 - q0).abs() <= 1e-12 * q0);
    }
}

#[test]
fn noise_drift_matches_generator() {
    let p0 = [0.9, -0.4, 1.3, 0.2, -1.1, 0.6, 0.0, -0.7];
    let n = p0.len();
    let (gamma, dt, m) = (1.0, 1e-3, 200_000);
    let mut rng = stream(21, 0);
    let mut acc = vec![Vec::with_capacity(m); n];
    let mut p = p0.to_vec();
    for _ in 0..m {
        p.copy_from_slice(&p0);
        noise_step(&mut p, gamma, dt, &mut rng);
        for x in 0..n {
            acc[x].push((p[x] - p0[x]) / dt);
        }
    }
    let g = |x: usize| 4.0 * p0[x % n] + p0[(x + n - 1) % n] + p0[(x + 1) % n];
    for x in 0..n {
        let lap = g(x + 1) + g(x + n - 1) - 2.0 * g(x);
        let drift = gamma / 6.0 * lap;
        let (mean, se) = mean_stderr(&acc[x]);
        assert!(
            (mean - drift).abs() < 3.0 * se,
            "site {x}: {mean} vs {drift} ± {se}"
        );
    }
}

#[test]
fn zero_noise_evolve_equals_repeated_verlet() {
    let spec = PotentialSpec::fpu(1.0, 0.5, 1.0);
    let mut a = random_state(&spec, 16, 4);
    let mut b = a.clone();
    let params = DynamicsParams::new(0.0, 0.01);
    let mut rng = stream(0, 0);
    evolve(&mut a, &spec, &params, 1.0, &mut rng, &mut []).unwrap();
    for _ in 0..100 {
        hamiltonian_step(&mut b, &spec, 0.01).unwrap();
    }
    assert_eq!(a.momenta, b.momenta);
    assert_eq!(a.config, b.config);
}

#[test]
fn harmonic_mode_energy_is_preserved_by_verlet() {
    let spec = PotentialSpec::harmonic(1.0);
    let n = 16;
    let k = 2.0 * PI * 3.0 / n as f64;
    let r: Vec<f64> = (0..n).map(|x| 0.1 * (k * x as f64).cos()).collect();
    let mut s = ChainState::new(vec![0.0; n], Configuration::Stretch(r)).unwrap();
    let e0 = total_energy(&s, &spec);
    for _ in 0..10_000 {
        hamiltonian_step(&mut s, &spec, 1e-3).unwrap();
    }
    assert!(((total_energy(&s, &spec) - e0) / e0).abs() < 1e-6);
}

#[test]
fn verlet_self_convergence_is_second_order() {
    let spec = PotentialSpec::fpu(1.0, 1.0, 1.0);
    let s0 = random_state(&spec, 64, 5);
    let run = |dt: f64| {
        let mut s = s0.clone();
        let steps = (1.0 / dt).round() as usize;
        for _ in 0..steps {
            hamiltonian_step(&mut s, &spec, dt).unwrap();
        }
        s
    };
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    let dist = |x: &ChainState, y: &ChainState| {
        x.momenta
            .iter()
            .zip(&y.momenta)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let ratio = dist(&a, &b) / dist(&b, &c);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_dynamics_conserves_momentum_and_stretch() {
    let spec = PotentialSpec::fpu(1.0, 1.0, 1.0);
    let mut s = random_state(&spec, 64, 6);
    let s0 = s.clone();
    let mut rng = stream(6, 1);
    evolve(
        &mut s,
        &spec,
        &DynamicsParams::new(1.0, 0.01),
        100.0,
        &mut rng,
        &mut [],
    )
    .unwrap();
    let rep = ConservationReport::relative_to(&s0, &s, &spec);
    let scale = s0.momenta.iter().map(|p| p.abs()).sum::<f64>();
    assert!(
        rep.momentum_drift.abs() <= 1e-10 * scale,
        "{}",
        rep.momentum_drift
    );
    assert!(rep.stretch_drift.abs() <= 1e-10 * scale);
}

#[test]
fn splitting_energy_drift_is_small() {
    let spec = PotentialSpec::harmonic(1.0);
    let mut rng = stream(7, 0);
    let mut s = sample_equilibrium(&spec, 0.0, 0.0, 1.0, 32, &mut rng).unwrap();
    let e0 = total_energy(&s, &spec);
    evolve(
        &mut s,
        &spec,
        &DynamicsParams::new(1.0, 1e-3),
        100.0,
        &mut rng,
        &mut [],
    )
    .unwrap();
    assert!(((total_energy(&s, &spec) - e0) / e0).abs() <= 1e-4);
}

#[test]
fn energy_field_matches_reference_and_hamiltonian() {
    for spec in [
        PotentialSpec::fpu(1.0, 0.3, 0.8),
        PotentialSpec::fpu(1.0, 0.0, 1.0).with_pinning(Pinning::Quartic { nu: 0.7, g: 0.4 }),
    ] {
        let s = random_state(&spec, 11, 8);
        let e = energy_field(&s, &spec);
        let n = s.n_sites();
        let c = s.config.values();
        for x in 0..n {
            let p = s.momenta[x];
            let reference = if spec.is_pinned() {
                p * p / 2.0 + spec.v(c[(x + 1) % n] - c[x]) + spec.w(c[x])
            } else {
                p * p / 2.0 + (spec.v(c[(x + n - 1) % n]) + spec.v(c[x])) / 2.0
            };
            assert!((e[x] - reference).abs() <= 1e-15 * reference.abs().max(1.0));
        }
        let h = total_energy(&s, &spec);
        assert!((e.iter().sum::<f64>() - h).abs() <= 1e-12 * h);
    }
    let spec = PotentialSpec::fpu(1.0, 0.3, 0.8);
    let zero = ChainState::at_rest(&spec, 5).unwrap();
    assert!(energy_field(&zero, &spec).iter().all(|e| *e == spec.v(0.0)));
}

/// Short-time generator oracle: `E[f(X_h) − f(X_0)]/h` over many one-step
/// draws, compared with the current differences.
#[test]
fn currents_satisfy_continuity_along_the_dynamics() {
    let spec = PotentialSpec::fpu(1.0, 0.5, 1.0);
    let s0 = random_state(&spec, 8, 9);
    let n = s0.n_sites();
    let (gamma, h, m) = (1.0, 1e-3, 100_000);
    let params = DynamicsParams::new(gamma, h);
    let e0 = energy_field(&s0, &spec);
    let mut de = vec![Vec::with_capacity(m); n];
    let mut dp = vec![Vec::with_capacity(m); n];
    let mut rng = stream(9, 1);
    for _ in 0..m {
        let mut s = s0.clone();
        evolve(&mut s, &spec, &params, h, &mut rng, &mut []).unwrap();
        let e = energy_field(&s, &spec);
        for x in 0..n {
            de[x].push((e[x] - e0[x]) / h);
            dp[x].push((s.momenta[x] - s0.momenta[x]) / h);
        }
    }
    let je = energy_current(&s0, &spec, gamma).unwrap();
    let jp = momentum_current(&s0, &spec, gamma).unwrap();
    let tot = |j: (f64, f64)| j.0 + j.1;
    for x in 0..n {
        let left = (x + n - 1) % n;
        let le = tot(je[left]) - tot(je[x]);
        let lp = jp[x] - jp[left];
        let (me, se) = mean_stderr(&de[x]);
        let (mp, sp) = mean_stderr(&dp[x]);
        // The one-step splitting adds an O(h) bias on top of the noise.
        assert!(
            (me - le).abs() < 3.0 * se + 5.0 * h,
            "energy at {x}: {me} vs {le} ± {se}"
        );
        assert!(
            (mp - lp).abs() < 3.0 * sp + 5.0 * h,
            "momentum at {x}: {mp} vs {lp} ± {sp}"
        );
    }
}

#[test]
fn current_special_cases() {
    let spec = PotentialSpec::harmonic(1.0);
    let s = ChainState::new(vec![0.0; 6], Configuration::Stretch(vec![0.4; 6])).unwrap();
    assert!(energy_current(&s, &spec, 1.0)
        .unwrap()
        .iter()
        .all(|j| j.0 == 0.0 && j.1 == 0.0));
    assert!(momentum_current(&s, &spec, 1.0)
        .unwrap()
        .iter()
        .all(|j| (j - 0.4).abs() < 1e-15));
    let s = ChainState::new(
        vec![0.8; 6],
        Configuration::Stretch(vec![0.1, -0.2, 0.3, 0.0, 0.1, 0.2]),
    )
    .unwrap();
    assert!(energy_current(&s, &spec, 2.0)
        .unwrap()
        .iter()
        .all(|j| j.1.abs() < 1e-14));
    let s = random_state(&spec, 6, 10);
    let j = momentum_current(&s, &spec, 0.0).unwrap();
    for x in 0..6 {
        assert_eq!(j[x], spec.dv(s.config.values()[x]));
    }
}

#[test]
fn stability_bounds() {
    let spec = PotentialSpec::harmonic(1.0);
    let s = ChainState::at_rest(&spec, 8).unwrap();
    assert!((stability_bound(&spec, &s) - 0.05).abs() < 1e-12);
    let pinned = PotentialSpec::harmonic(1.0).with_pinning(Pinning::Quadratic { nu: 2.0 });
    let s = ChainState::at_rest(&pinned, 8).unwrap();
    assert!((stability_bound(&pinned, &s) - 0.1 / 8f64.sqrt()).abs() < 1e-12);
}

/// Site-averaged `p²`, `r²` and `p⁴` at the observer checkpoints.
struct MomentProbe {
    stride: usize,
    samples: Vec<[f64; 3]>,
}

impl Observer for MomentProbe {
    fn stride(&self) -> usize {
        self.stride
    }

    fn observe(
        &mut self,
        _step: u64,
        state: &ChainState,
        _spec: &PotentialSpec,
    ) -> chainlab::Result<()> {
        let n = state.n_sites() as f64;
        let p2 = state.momenta.iter().map(|p| p * p).sum::<f64>() / n;
        let p4 = state.momenta.iter().map(|p| p.powi(4)).sum::<f64>() / n;
        let r2 = state.config.values().iter().map(|r| r * r).sum::<f64>() / n;
        self.samples.push([p2, r2, p4]);
        Ok(())
    }
}

#[test]
fn product_measure_is_stationary() {
    let spec = PotentialSpec::harmonic(1.0);
    let params = DynamicsParams::new(1.0, 0.04);
    let (n_traj, t_final) = (40, 200.0);
    let mut per_time: Vec<Vec<[f64; 3]>> = Vec::new();
    for i in 0..n_traj {
        let mut rng = stream(12, i);
        let mut s = sample_equilibrium(&spec, 0.0, 0.0, 1.0, 128, &mut rng).unwrap();
        let mut probe = MomentProbe {
            stride: 1250,
            samples: Vec::new(),
        };
        evolve(&mut s, &spec, &params, t_final, &mut rng, &mut [&mut probe]).unwrap();
        per_time.push(probe.samples);
    }
    let exact = [1.0, 1.0, 3.0];
    for t in 0..per_time[0].len() {
        for m in 0..3 {
            let xs: Vec<f64> = per_time.iter().map(|s| s[t][m]).collect();
            let (mean, se) = mean_stderr(&xs);
            assert!(
                (mean - exact[m]).abs() < 3.0 * se,
                "checkpoint {t}, moment {m}: {mean} ± {se}"
            );
        }
    }
}
