use super::dispersion::DispersionSpec;
use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::stats::LinearDensityTable;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

/// Nodes of the inverse-CDF tables used to draw post-collision modes.
pub const JUMP_TABLE_POINTS: usize = 4096;

/// One realization of the mode process `K(t)` and position `Y(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhononTrajectory {
    /// `0` followed by the jump times.
    pub times: Vec<f64>,
    /// Mode held from `times[i]` until the next jump.
    pub modes: Vec<f64>,
    /// `Y(times[i])`.
    pub positions: Vec<f64>,
    pub final_time: f64,
    pub final_position: f64,
}

impl PhononTrajectory {
    pub fn n_jumps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn final_mode(&self) -> f64 {
        self.modes[self.modes.len() - 1]
    }

    /// CSV `t_jump,k,y`; the first row is the initial condition.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# final_time = {:e}", self.final_time)?;
        writeln!(w, "# final_position = {:e}", self.final_position)?;
        writeln!(w, "t_jump,k,y")?;
        for ((t, k), y) in self.times.iter().zip(&self.modes).zip(&self.positions) {
            writeln!(w, "{t:e},{k:e},{y:e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum JumpSampler {
    Single(LinearDensityTable),
    Uniform,
    Rows(Vec<LinearDensityTable>),
}

/// Dispersion, kernel and noise strength with precomputed jump tables.
#[derive(Clone, Debug)]
pub struct PhononModel {
    pub dispersion: DispersionSpec,
    pub kernel: KernelSpec,
    pub gamma: f64,
    sampler: JumpSampler,
}

fn table(f: impl Fn(f64) -> f64) -> LinearDensityTable {
    let m = JUMP_TABLE_POINTS;
    LinearDensityTable::new(0.0, 1.0, (0..=m).map(|i| f(i as f64 / m as f64)).collect())
}

impl PhononModel {
    pub fn new(dispersion: DispersionSpec, kernel: KernelSpec, gamma: f64) -> Result<Self> {
        dispersion.validate()?;
        kernel.validate()?;
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be >= 0, got {gamma}")));
        }
        let sampler = match &kernel {
            KernelSpec::Product { .. } => JumpSampler::Single(table(|k| (PI * k).sin().powi(2))),
            KernelSpec::Constant { .. } => JumpSampler::Uniform,
            KernelSpec::Tabulated(t) => JumpSampler::Rows(
                (0..t.size())
                    .map(|i| table(|k| (PI * k).sin().powi(2) * t.row_value(i, k)))
                    .collect(),
            ),
        };
        Ok(Self {
            dispersion,
            kernel,
            gamma,
            sampler,
        })
    }

    #[inline]
    pub fn rate(&self, k: f64) -> f64 {
        self.kernel.total_rate(self.gamma, k)
    }

    #[inline]
    pub fn velocity(&self, k: f64) -> f64 {
        self.dispersion.velocity(k)
    }

    /// Post-collision mode drawn from `C(k, ·)/∫C(k, ·)`.
    #[inline]
    pub fn next_mode<R: Rng + ?Sized>(&self, k: f64, rng: &mut R) -> f64 {
        match &self.sampler {
            JumpSampler::Single(t) => t.quantile(rng.random()),
            JumpSampler::Uniform => rng.random(),
            JumpSampler::Rows(rows) => {
                let KernelSpec::Tabulated(tab) = &self.kernel else {
                    unreachable!()
                };
                let (i0, i1, w) = tab.bracket(k);
                let (a, b) = (w * tab.row_rate(i0), (1.0 - w) * tab.row_rate(i1));
                let row = if rng.random::<f64>() * (a + b) < a {
                    i0
                } else {
                    i1
                };
                rows[row].quantile(rng.random())
            }
        }
    }

    #[inline]
    fn holding_time<R: Rng + ?Sized>(&self, k: f64, rng: &mut R) -> f64 {
        let rate = self.rate(k);
        if rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / rate
        } else {
            f64::INFINITY
        }
    }

    /// Full trajectory on `[0, t_final]` started from mode `k0` at `Y = 0`.
    pub fn sample_trajectory<R: Rng + ?Sized>(
        &self,
        k0: f64,
        t_final: f64,
        rng: &mut R,
    ) -> Result<PhononTrajectory> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {t_final}"
            )));
        }
        let mut traj = PhononTrajectory {
            times: vec![0.0],
            modes: vec![k0.rem_euclid(1.0)],
            positions: vec![0.0],
            final_time: t_final,
            final_position: 0.0,
        };
        let (mut t, mut y, mut k) = (0.0, 0.0, k0.rem_euclid(1.0));
        loop {
            let next = t + self.holding_time(k, rng);
            if next > t_final {
                traj.final_position = y + self.velocity(k) * (t_final - t);
                return Ok(traj);
            }
            y += self.velocity(k) * (next - t);
            t = next;
            k = self.next_mode(k, rng);
            traj.times.push(t);
            traj.modes.push(k);
            traj.positions.push(y);
        }
    }

    /// `(Y, K)` at each of the increasing `horizons`, and the number of jumps.
    pub fn sample_positions<R: Rng + ?Sized>(
        &self,
        k0: f64,
        horizons: &[f64],
        rng: &mut R,
    ) -> (Vec<(f64, f64)>, u64) {
        let mut out = Vec::with_capacity(horizons.len());
        let (mut t, mut y, mut k) = (0.0, 0.0, k0.rem_euclid(1.0));
        let mut next = self.holding_time(k, rng);
        let mut jumps = 0;
        for &h in horizons {
            while next <= h {
                y += self.velocity(k) * (next - t);
                t = next;
                k = self.next_mode(k, rng);
                next = t + self.holding_time(k, rng);
                jumps += 1;
            }
            out.push((y + self.velocity(k) * (h - t), k));
        }
        (out, jumps)
    }
}

/// Initial law of the mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialMode {
    /// Uniform on `[0, 1)`, the invariant law of `K`.
    Uniform,
    Fixed(f64),
}

/// Positions and modes of many independent trajectories at common horizons.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub horizons: Vec<f64>,
    /// `positions[h][i]` is `Y_i(horizons[h])`.
    pub positions: Vec<Vec<f64>>,
    pub modes: Vec<Vec<f64>>,
    pub total_jumps: u64,
}

impl Ensemble {
    pub fn n_trajectories(&self) -> usize {
        self.positions.first().map_or(0, |p| p.len())
    }
}

/// Samples `n` trajectories; trajectory `i` uses random stream `i` of `seed`
/// and results are stored in trajectory order.
pub fn sample_ensemble(
    model: &PhononModel,
    n: usize,
    horizons: &[f64],
    initial: InitialMode,
    seed: u64,
) -> Result<Ensemble> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(Error::Config(
            "horizons must be positive and strictly increasing".into(),
        ));
    }
    let runs: Vec<(Vec<(f64, f64)>, u64)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let k0 = match initial {
                InitialMode::Uniform => rng.random::<f64>(),
                InitialMode::Fixed(k) => k,
            };
            model.sample_positions(k0, horizons, &mut rng)
        })
        .collect();
    let mut positions = vec![Vec::with_capacity(n); horizons.len()];
    let mut modes = vec![Vec::with_capacity(n); horizons.len()];
    let mut total_jumps = 0;
    for (pts, j) in runs {
        total_jumps += j;
        for (h, (y, k)) in pts.into_iter().enumerate() {
            positions[h].push(y);
            modes[h].push(k);
        }
    }
    Ok(Ensemble {
        horizons: horizons.to_vec(),
        positions,
        modes,
        total_jumps,
    })
}

/// Convenience wrapper building the model for a single trajectory.
pub fn sample_trajectory<R: Rng + ?Sized>(
    disp: DispersionSpec,
    kernel: KernelSpec,
    gamma: f64,
    k0: f64,
    t_final: f64,
    rng: &mut R,
) -> Result<PhononTrajectory> {
    PhononModel::new(disp, kernel, gamma)?.sample_trajectory(k0, t_final, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ballistic_without_noise() {
        let d = DispersionSpec::Unpinned { c: 2.0 };
        let tr = sample_trajectory(
            d,
            KernelSpec::Product { strength: 1.0 },
            0.0,
            0.2,
            10.0,
            &mut stream(0, 0),
        )
        .unwrap();
        assert_eq!(tr.n_jumps(), 0);
        assert!((tr.final_position - d.velocity(0.2) * 10.0).abs() < 1e-12);
    }

    #[test]
    fn positions_are_piecewise_linear() {
        let d = DispersionSpec::Pinned { c: 1.0, nu: 1.0 };
        let m = PhononModel::new(d, KernelSpec::Product { strength: 1.0 }, 2.0).unwrap();
        let tr = m.sample_trajectory(0.3, 50.0, &mut stream(3, 0)).unwrap();
        assert!(tr.n_jumps() > 10);
        for i in 1..tr.times.len() {
            assert!(tr.times[i] > tr.times[i - 1]);
            let dy = d.velocity(tr.modes[i - 1]) * (tr.times[i] - tr.times[i - 1]);
            assert!((tr.positions[i] - tr.positions[i - 1] - dy).abs() < 1e-12);
        }
        // The lean sampler reproduces the same path with the same stream.
        let (pts, jumps) = m.sample_positions(0.3, &[50.0], &mut stream(3, 0));
        assert_eq!(jumps as usize, tr.n_jumps());
        assert!((pts[0].0 - tr.final_position).abs() < 1e-12);
    }
}
