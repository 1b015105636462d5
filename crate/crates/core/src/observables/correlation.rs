use crate::dynamics::{
    energy_field, evolve, total_hamiltonian_current, ChainState, DynamicsParams, Observer,
};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::stats::Running;
use crate::thermo::{sample_gibbs_mcmc, PotentialSpec, StretchSampler};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::Write;

/// Settings for an equilibrium current-correlation run.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationConfig {
    pub temperature: f64,
    pub n_sites: usize,
    /// Largest lag, in time units.
    pub lag_max: f64,
    /// Integrator steps between recorded currents.
    pub sample_every: usize,
    pub n_trajectories: usize,
    /// Production time per trajectory.
    pub run_time: f64,
    /// Equilibration time per trajectory before recording.
    pub burn_in: f64,
    /// Batch-means blocks per trajectory.
    pub blocks_per_trajectory: usize,
    /// Metropolis sweeps used to draw pinned initial states.
    pub mcmc_sweeps: usize,
}

impl CorrelationConfig {
    pub fn validate(&self, params: &DynamicsParams) -> Result<()> {
        params.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature must be > 0, got {}", self.temperature));
        }
        if self.n_sites < 3 {
            return bad(format!("n_sites must be >= 3, got {}", self.n_sites));
        }
        if self.sample_every == 0 || self.n_trajectories == 0 || self.blocks_per_trajectory == 0 {
            return bad(
                "sample_every, n_trajectories and blocks_per_trajectory must be positive".into(),
            );
        }
        if !(self.lag_max > 0.0 && self.run_time > 0.0 && self.burn_in >= 0.0) {
            return bad("lag_max and run_time must be > 0, burn_in >= 0".into());
        }
        let origins = self.origins_per_trajectory(params.dt);
        if origins < self.blocks_per_trajectory {
            return bad(format!(
                "run_time {} leaves only {origins} time origins beyond lag_max {}",
                self.run_time, self.lag_max
            ));
        }
        Ok(())
    }

    pub fn sample_interval(&self, dt: f64) -> f64 {
        dt * self.sample_every as f64
    }

    pub fn n_lags(&self, dt: f64) -> usize {
        (self.lag_max / self.sample_interval(dt)).round() as usize + 1
    }

    fn n_recorded(&self, dt: f64) -> usize {
        (self.run_time / self.sample_interval(dt)).floor() as usize + 1
    }

    fn origins_per_trajectory(&self, dt: f64) -> usize {
        self.n_recorded(dt).saturating_sub(self.n_lags(dt) - 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMeta {
    pub temperature: f64,
    pub gamma: f64,
    pub dt: f64,
    pub spec: String,
    pub n_sites: usize,
    pub n_trajectories: usize,
    /// Number of (origin, trajectory) pairs per lag.
    pub total_samples: usize,
    /// Monte Carlo estimate of `Σ_x (⟨E_x E_0⟩ − u²)` with its standard error.
    pub susceptibility: Option<(f64, f64)>,
    pub warning: Option<String>,
}

/// `C(t) = ⟨J(t) J(0)⟩ / N` with `J` the total Hamiltonian energy current.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Per-block estimates (batch means), one row per block.
    pub blocks: Vec<Vec<f64>>,
    pub meta: CorrelationMeta,
}

impl CorrelationSeries {
    /// Series with no block structure, e.g. from an analytic expression.
    pub fn from_values(
        lags: Vec<f64>,
        values: Vec<f64>,
        std_errors: Vec<f64>,
        meta: CorrelationMeta,
    ) -> Result<Self> {
        if lags.is_empty() || lags.len() != values.len() || lags.len() != std_errors.len() {
            return Err(Error::Config(
                "lags, values and errors must have equal nonzero length".into(),
            ));
        }
        Ok(Self {
            lags,
            values,
            std_errors,
            blocks: Vec::new(),
            meta,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.meta;
        writeln!(w, "# temperature = {}", m.temperature)?;
        writeln!(w, "# gamma = {}", m.gamma)?;
        writeln!(w, "# dt = {}", m.dt)?;
        writeln!(w, "# spec = {}", m.spec)?;
        writeln!(w, "# n_sites = {}", m.n_sites)?;
        writeln!(w, "# n_trajectories = {}", m.n_trajectories)?;
        writeln!(w, "# total_samples = {}", m.total_samples)?;
        writeln!(
            w,
            "# chi_temperature_squared = {:e}",
            m.temperature * m.temperature
        )?;
        if let Some((chi, se)) = m.susceptibility {
            writeln!(w, "# chi_susceptibility = {chi:e} +- {se:e}")?;
        }
        if let Some(msg) = &m.warning {
            writeln!(w, "# warning = {msg}")?;
        }
        writeln!(w, "lag,value,stderr")?;
        for ((t, v), e) in self.lags.iter().zip(&self.values).zip(&self.std_errors) {
            writeln!(w, "{t:e},{v:e},{e:e}")?;
        }
        Ok(())
    }
}

struct CurrentRecorder {
    stride: usize,
    values: Vec<f64>,
}

impl Observer for CurrentRecorder {
    fn stride(&self) -> usize {
        self.stride
    }

    fn observe(&mut self, _step: u64, state: &ChainState, spec: &PotentialSpec) -> Result<()> {
        self.values.push(total_hamiltonian_current(state, spec));
        Ok(())
    }
}

/// Equilibrium initial state at temperature `T`: the product measure with
/// zero mean momentum for unpinned chains, Metropolis Gibbs state otherwise.
pub fn equilibrium_state<R: rand::Rng + ?Sized>(
    spec: &PotentialSpec,
    temperature: f64,
    n_sites: usize,
    mcmc_sweeps: usize,
    rng: &mut R,
) -> Result<ChainState> {
    let beta = 1.0 / temperature;
    if spec.is_pinned() {
        sample_gibbs_mcmc(spec, beta, n_sites, mcmc_sweeps, rng)
    } else {
        let sampler = StretchSampler::new(spec, 0.0, beta)?;
        crate::thermo::sample_with(&sampler, 0.0, beta, n_sites, rng)
    }
}

/// Time series of the total current along one equilibrium trajectory.
pub fn current_series(
    spec: &PotentialSpec,
    params: &DynamicsParams,
    cfg: &CorrelationConfig,
    seed: u64,
    trajectory: u64,
) -> Result<Vec<f64>> {
    let mut rng = stream(seed, trajectory);
    let mut state = equilibrium_state(
        spec,
        cfg.temperature,
        cfg.n_sites,
        cfg.mcmc_sweeps,
        &mut rng,
    )?;
    if cfg.burn_in > 0.0 {
        evolve(&mut state, spec, params, cfg.burn_in, &mut rng, &mut [])?;
    }
    state.time = 0.0;
    let span = cfg.sample_interval(params.dt) * (cfg.n_recorded(params.dt) - 1) as f64;
    let mut rec = CurrentRecorder {
        stride: cfg.sample_every,
        values: Vec::with_capacity(cfg.n_recorded(params.dt)),
    };
    evolve(&mut state, spec, params, span, &mut rng, &mut [&mut rec])?;
    Ok(rec.values)
}

/// `out[l] = Σ_{s < n_origins} x[s] x[s+l]` for `l ≤ max_lag`, by chunked FFT.
pub fn lagged_products(x: &[f64], n_origins: usize, max_lag: usize) -> Vec<f64> {
    assert!(n_origins + max_lag <= x.len());
    let chunk = (4 * (max_lag + 1)).next_power_of_two();
    let size = (chunk + max_lag + 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut out = vec![0.0; max_lag + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    let mut prod = vec![Complex64::new(0.0, 0.0); size];
    let mut start = 0;
    while start < n_origins {
        let len = chunk.min(n_origins - start);
        let ext = (len + max_lag).min(x.len() - start);
        // Pack origins (real part) and the extended window (imaginary part).
        for (i, b) in buf.iter_mut().enumerate() {
            let a = if i < len { x[start + i] } else { 0.0 };
            let e = if i < ext { x[start + i] } else { 0.0 };
            *b = Complex64::new(a, e);
        }
        fwd.process(&mut buf);
        for k in 0..size {
            let zk = buf[k];
            let zc = buf[(size - k) % size].conj();
            let a = 0.5 * (zk + zc);
            let b = Complex64::new(0.0, -0.5) * (zk - zc);
            prod[k] = a.conj() * b;
        }
        inv.process(&mut prod);
        for (l, o) in out.iter_mut().enumerate() {
            *o += prod[l].re / size as f64;
        }
        start += len;
    }
    out
}

/// Runs independent equilibrium trajectories and estimates `C(t)` by time
/// averaging over origins, with batch-means errors over blocks of origins.
///
/// Trajectory `i` uses random stream `i` of `seed`; results are combined in
/// trajectory order, so the output does not depend on the thread count.
pub fn current_autocorrelation(
    spec: &PotentialSpec,
    params: &DynamicsParams,
    cfg: &CorrelationConfig,
    seed: u64,
) -> Result<CorrelationSeries> {
    spec.validate()?;
    cfg.validate(params)?;
    let n_lags = cfg.n_lags(params.dt);
    let origins = cfg.origins_per_trajectory(params.dt);
    let per_block = origins / cfg.blocks_per_trajectory;
    let norm = 1.0 / (cfg.n_sites as f64 * per_block as f64);

    let per_traj: Vec<Result<Vec<Vec<f64>>>> = (0..cfg.n_trajectories as u64)
        .into_par_iter()
        .map(|i| {
            let series = current_series(spec, params, cfg, seed, i)?;
            Ok((0..cfg.blocks_per_trajectory)
                .map(|b| {
                    let window = &series[b * per_block..];
                    let mut c = lagged_products(window, per_block, n_lags - 1);
                    c.iter_mut().for_each(|v| *v *= norm);
                    c
                })
                .collect())
        })
        .collect();
    let mut blocks = Vec::with_capacity(cfg.n_trajectories * cfg.blocks_per_trajectory);
    for r in per_traj {
        blocks.extend(r?);
    }

    let (values, std_errors) = column_stats(&blocks, n_lags);
    let dtau = cfg.sample_interval(params.dt);
    let lags = (0..n_lags).map(|l| l as f64 * dtau).collect();
    let mut warning = None;
    if blocks.len() < 8 {
        warning = Some(format!(
            "only {} blocks; error bars are unreliable",
            blocks.len()
        ));
    } else if std_errors[0] > 0.05 * values[0].abs() {
        warning = Some(format!(
            "lag-0 relative error {:.3} exceeds 5%; more samples needed",
            std_errors[0] / values[0].abs()
        ));
    }
    Ok(CorrelationSeries {
        lags,
        values,
        std_errors,
        blocks,
        meta: CorrelationMeta {
            temperature: cfg.temperature,
            gamma: params.gamma,
            dt: params.dt,
            spec: spec.to_string(),
            n_sites: cfg.n_sites,
            n_trajectories: cfg.n_trajectories,
            total_samples: per_block * cfg.blocks_per_trajectory * cfg.n_trajectories,
            susceptibility: None,
            warning,
        },
    })
}

pub(crate) fn column_stats(rows: &[Vec<f64>], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut acc = vec![Running::new(); n];
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            a.push(*v);
        }
    }
    let mean = acc.iter().map(|a| a.mean()).collect();
    let se = acc
        .iter()
        .map(|a| if a.count() > 1 { a.std_error() } else { 0.0 })
        .collect();
    (mean, se)
}

/// Static energy susceptibility `Var(Σ_x E_x)/N` over independent equilibrium
/// draws, returned as `(estimate, standard error)`.
pub fn energy_susceptibility(
    spec: &PotentialSpec,
    temperature: f64,
    n_sites: usize,
    n_draws: usize,
    mcmc_sweeps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_draws < 4 {
        return Err(Error::Config(
            "susceptibility needs at least 4 draws".into(),
        ));
    }
    let totals: Vec<Result<f64>> = (0..n_draws as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let s = equilibrium_state(spec, temperature, n_sites, mcmc_sweeps, &mut rng)?;
            Ok(energy_field(&s, spec).iter().sum())
        })
        .collect();
    let totals: Vec<f64> = totals.into_iter().collect::<Result<_>>()?;
    let n = totals.len() as f64;
    let mean = totals.iter().sum::<f64>() / n;
    let dev: Vec<f64> = totals.iter().map(|h| (h - mean) * (h - mean)).collect();
    let var = dev.iter().sum::<f64>() / (n - 1.0);
    // Standard error of the sample variance via the fourth central moment.
    let m4 = dev.iter().map(|d| d * d).sum::<f64>() / n;
    let var_se = ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n)
        .max(0.0)
        .sqrt();
    Ok((var / n_sites as f64, var_se / n_sites as f64))
}
