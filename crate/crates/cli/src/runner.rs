//! Experiment dispatch. Each kind turns a validated config into named CSV
//! outputs plus summary lines; [`run`] adds checksums and the manifest.

use crate::config::{emit_config, validate, ExperimentConfig, Kind};
use crate::error::CliError;
use crate::manifest::{RunManifest, Status};
use chainlab::dynamics::{
    evolve, total_hamiltonian_current, ChainState, ConservationReport, DynamicsParams, Observer,
};
use chainlab::fracheat::FracHeatProblem;
use chainlab::hydro::{run_euler, HydroField};
use chainlab::kinetics::{
    estimate_scaling_exponent, sample_ensemble, ExponentMethod, InitialMode, PhononModel,
    TransportField, TransportSolver,
};
use chainlab::observables::{
    current_autocorrelation, energy_susceptibility, equilibrium_state, green_kubo,
    CorrelationConfig,
};
use chainlab::rng::StreamFactory;
use chainlab::thermo::{PotentialSpec, ThermoTable};
use rand::Rng;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Stream ids handed out by the run's [`StreamFactory`]. Tasks that need
/// many trajectories receive a derived seed and number their own streams.
mod streams {
    pub const CHAIN: u64 = 0;
    pub const CORRELATION: u64 = 1;
    pub const SUSCEPTIBILITY: u64 = 2;
    pub const ENSEMBLE: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const SAMPLE_PATH: u64 = 5;
}

/// A named primary output.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Default)]
struct Computed {
    outputs: Vec<Output>,
    summary: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Computed {
    fn output(&mut self, name: &str, text: String) {
        self.outputs.push(Output {
            name: name.into(),
            bytes: text.into_bytes(),
        });
    }

    fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }
}

fn csv<F>(f: F) -> Result<String, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> chainlab::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CliError::Usage(e.to_string()))
}

fn derived_seed(f: &StreamFactory, id: u64) -> u64 {
    f.stream(id).random()
}

struct SeriesRecorder {
    stride: usize,
    text: String,
}

impl Observer for SeriesRecorder {
    fn stride(&self) -> usize {
        self.stride
    }

    fn observe(
        &mut self,
        _step: u64,
        state: &ChainState,
        spec: &PotentialSpec,
    ) -> chainlab::Result<()> {
        let c = ConservationReport::measure(state, spec);
        writeln!(
            self.text,
            "{:e},{:e},{:e},{:e},{:e}",
            state.time,
            c.total_energy,
            c.total_momentum,
            c.total_stretch,
            total_hamiltonian_current(state, spec)
        )
        .expect("string write");
        Ok(())
    }
}

fn chain_run(
    cfg: &ExperimentConfig,
    f: &StreamFactory,
    out: &mut Computed,
) -> Result<(), CliError> {
    let spec = cfg.potential();
    let c = &cfg.chain;
    let params = DynamicsParams::new(cfg.model.gamma, c.dt);
    let mut rng = f.stream(streams::CHAIN);
    let mut state =
        equilibrium_state(&spec, cfg.temperature(), c.n_sites, c.mcmc_sweeps, &mut rng)?;
    if c.burn_in > 0.0 {
        evolve(&mut state, &spec, &params, c.burn_in, &mut rng, &mut [])?;
    }
    state.time = 0.0;
    let initial = state.clone();
    let mut rec = SeriesRecorder {
        stride: c.sample_every,
        text: format!(
            "# spec = {spec}\n# gamma = {}\n# dt = {}\ntime,energy,momentum,stretch,current\n",
            cfg.model.gamma, c.dt
        ),
    };
    evolve(
        &mut state,
        &spec,
        &params,
        c.t_max,
        &mut rng,
        &mut [&mut rec],
    )?;
    let report = ConservationReport::relative_to(&initial, &state, &spec);
    out.output("series.csv", rec.text);
    out.output("state.csv", csv(|w| state.write_csv(w))?);
    out.summary("final_time", state.time);
    out.summary("energy", report.total_energy);
    out.summary("energy_drift", report.energy_drift);
    out.summary("momentum_drift", report.momentum_drift);
    out.summary("stretch_drift", report.stretch_drift);
    Ok(())
}

fn green_kubo_run(
    cfg: &ExperimentConfig,
    f: &StreamFactory,
    out: &mut Computed,
) -> Result<(), CliError> {
    let spec = cfg.potential();
    let c = &cfg.chain;
    let g = &cfg.green_kubo;
    let params = DynamicsParams::new(cfg.model.gamma, c.dt);
    let corr = CorrelationConfig {
        temperature: cfg.temperature(),
        n_sites: c.n_sites,
        lag_max: g.lag_max,
        sample_every: c.sample_every,
        n_trajectories: g.n_trajectories,
        run_time: c.t_max,
        burn_in: c.burn_in,
        blocks_per_trajectory: g.blocks,
        mcmc_sweeps: c.mcmc_sweeps,
    };
    let mut series =
        current_autocorrelation(&spec, &params, &corr, derived_seed(f, streams::CORRELATION))?;
    if cfg.chi_mode() == chainlab::observables::ChiMode::Susceptibility {
        series.meta.susceptibility = Some(energy_susceptibility(
            &spec,
            cfg.temperature(),
            c.n_sites,
            g.susceptibility_draws,
            c.mcmc_sweeps,
            derived_seed(f, streams::SUSCEPTIBILITY),
        )?);
    }
    let gk = green_kubo(&series, cfg.model.gamma, cfg.temperature(), cfg.chi_mode())?;
    if let Some(w) = &series.meta.warning {
        out.warnings.push(w.clone());
    }
    if gk.divergence_flag {
        out.warnings.push(format!(
            "running integral still growing: I(2τ) − I(τ) = {:.4e} ± {:.4e}",
            gk.gap, gk.gap_stderr
        ));
    }
    if gk.floor_violated {
        out.warnings
            .push("I(τ_max) < 0: estimate below the stochastic floor γT²".into());
    }
    out.output("correlation.csv", csv(|w| series.write_csv(w))?);
    out.output("green_kubo.csv", csv(|w| gk.write_csv(w))?);
    out.summary("kappa", gk.kappa);
    out.summary("kappa_stderr", gk.kappa_stderr);
    out.summary("relative_gap", gk.relative_gap());
    out.summary("divergence_flag", gk.divergence_flag);
    Ok(())
}

fn quartiles(ys: &[f64]) -> [f64; 3] {
    let mut s = ys.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| s[((s.len() - 1) as f64 * p).round() as usize];
    [q(0.25), q(0.5), q(0.75)]
}

fn phonon_mc(
    cfg: &ExperimentConfig,
    f: &StreamFactory,
    out: &mut Computed,
) -> Result<(), CliError> {
    let k = &cfg.kinetics;
    let model = PhononModel::new(cfg.dispersion(), cfg.kernel()?, cfg.model.gamma)?;
    let ens = sample_ensemble(
        &model,
        k.n_trajectories,
        &k.horizons,
        InitialMode::Uniform,
        derived_seed(f, streams::ENSEMBLE),
    )?;
    let method = match k.method {
        crate::config::EstimatorKind::CharFn => ExponentMethod::CharFnFit,
        crate::config::EstimatorKind::Quantile => ExponentMethod::QuantileRatio,
    };
    let est = estimate_scaling_exponent(
        &ens,
        method,
        k.bootstrap,
        derived_seed(f, streams::BOOTSTRAP),
    )?;

    let mut spread = String::from("horizon,q25,median,q75,iqr\n");
    for (h, ys) in ens.horizons.iter().zip(&ens.positions) {
        let [a, m, b] = quartiles(ys);
        writeln!(spread, "{h:e},{a:e},{m:e},{b:e},{:e}", b - a).unwrap();
    }
    let last = ens.horizons.len() - 1;
    let mut positions = format!("# horizon = {:e}\ny,k\n", ens.horizons[last]);
    for (y, m) in ens.positions[last].iter().zip(&ens.modes[last]) {
        writeln!(positions, "{y:e},{m:e}").unwrap();
    }
    let mut rng = f.stream(streams::SAMPLE_PATH);
    let path = model.sample_trajectory(rng.random(), ens.horizons[last], &mut rng)?;

    out.output("exponent.txt", est.report());
    out.output("spread.csv", spread);
    out.output("positions.csv", positions);
    out.output("trajectory.csv", csv(|w| path.write_csv(w))?);
    out.summary("method", format!("{:?}", est.method));
    out.summary("alpha", est.alpha);
    out.summary("ci_low", est.ci.0);
    out.summary("ci_high", est.ci.1);
    out.summary("excess_kurtosis", est.excess_kurtosis);
    out.summary("n_trajectories", est.n_trajectories);
    out.summary("total_jumps", ens.total_jumps);
    Ok(())
}

fn transport(cfg: &ExperimentConfig, out: &mut Computed) -> Result<(), CliError> {
    let t = &cfg.transport;
    let solver = TransportSolver::new(cfg.dispersion(), cfg.kernel()?, cfg.model.gamma, t.cfl)?;
    let norm = 1.0 / (t.width * (2.0 * std::f64::consts::PI).sqrt());
    let initial = TransportField::from_fn(t.n_y, t.n_k, t.origin, t.length, |y, _| {
        norm * (-0.5 * (y / t.width).powi(2)).exp()
    })?;
    let field = solver.solve(&initial, t.t_max)?;
    let mut density = String::from("y,density\n");
    for (i, v) in field.k_integrated().iter().enumerate() {
        writeln!(density, "{:e},{v:e}", field.y(i)).unwrap();
    }
    out.output("transport.csv", csv(|w| field.write_csv(w))?);
    out.output("density.csv", density);
    out.summary("mass_initial", initial.mass());
    out.summary("mass_final", field.mass());
    Ok(())
}

fn frac_heat(cfg: &ExperimentConfig, out: &mut Computed) -> Result<(), CliError> {
    let f = &cfg.frac;
    let problem =
        FracHeatProblem::point_mass(f.alpha, f.diffusivity, f.origin, f.length, f.n, f.y0)?;
    let u = problem.solve(f.t_max)?;
    out.output("profile.csv", csv(|w| u.write_csv(w))?);
    out.summary("mass", u.mass());
    out.summary("l2_norm", u.l2_norm());
    Ok(())
}

fn build_table(cfg: &ExperimentConfig) -> Result<ThermoTable, CliError> {
    let t = &cfg.table;
    Ok(ThermoTable::build(
        &cfg.potential(),
        (t.r_min, t.r_max),
        (t.u_min, t.u_max),
        t.n_r,
        t.n_u,
        cfg.interpolation(),
    )?)
}

fn euler(cfg: &ExperimentConfig, out: &mut Computed) -> Result<(), CliError> {
    let spec = cfg.potential();
    let table = build_table(cfg)?;
    let e = &cfg.euler;
    let two_pi = 2.0 * std::f64::consts::PI;
    let initial = HydroField::from_fn(e.cells, 0.0, 1.0, |y| {
        let r = e.r_amp * (two_pi * y).sin();
        let p = e.p_amp * (two_pi * y).cos();
        [r, p, e.e0 + 0.5 * p * p + spec.v(r)]
    })?;
    let run = run_euler(&initial, &table, e.cfl, e.t_max)?;
    let mut history = String::from("time,entropy,r_total,p_total,e_total\n");
    for ((t, s), c) in run
        .times
        .iter()
        .zip(&run.entropy_totals)
        .zip(&run.conserved_totals)
    {
        writeln!(history, "{t:e},{s:e},{:e},{:e},{:e}", c[0], c[1], c[2]).unwrap();
    }
    out.output("field.csv", csv(|w| run.field.write_csv(&table, w))?);
    out.output("history.csv", history);
    out.summary("steps", run.times.len() - 1);
    out.summary("conservation_error", run.conservation_error());
    out.summary("entropy_drift", run.entropy_drift());
    Ok(())
}

fn thermo_table(cfg: &ExperimentConfig, out: &mut Computed) -> Result<(), CliError> {
    let table = build_table(cfg)?;
    out.output("table.csv", csv(|w| table.write_csv(w))?);
    out.summary("concavity_violation", table.concavity_violation());
    Ok(())
}

fn compute(cfg: &ExperimentConfig, f: &StreamFactory) -> Result<Computed, CliError> {
    let mut out = Computed::default();
    match cfg.kind {
        Kind::ChainRun => chain_run(cfg, f, &mut out)?,
        Kind::GreenKubo => green_kubo_run(cfg, f, &mut out)?,
        Kind::PhononMc => phonon_mc(cfg, f, &mut out)?,
        Kind::Transport => transport(cfg, &mut out)?,
        Kind::FracHeat => frac_heat(cfg, &mut out)?,
        Kind::Euler => euler(cfg, &mut out)?,
        Kind::ThermoTable => thermo_table(cfg, &mut out)?,
    }
    Ok(out)
}

/// Fails on the first NaN or infinity in a data row of a CSV output.
pub fn check_finite(output: &Output) -> Result<(), CliError> {
    let text = String::from_utf8_lossy(&output.bytes);
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        let bad = line
            .split([',', '='])
            .filter_map(|field| field.trim().parse::<f64>().ok())
            .any(|v| !v.is_finite());
        if bad {
            return Err(CliError::NonFinite {
                output: output.name.clone(),
                line: i + 1,
            });
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn execute(cfg: &ExperimentConfig, dir: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    validate(cfg)?;
    let factory = StreamFactory::new(cfg.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let result = pool.install(|| compute(cfg, &factory));
    manifest.streams_issued = factory.issued();
    let computed = result?;
    manifest.summary = computed.summary;
    manifest.warnings = computed.warnings;
    for o in &computed.outputs {
        check_finite(o)?;
    }
    std::fs::create_dir_all(dir)?;
    for o in &computed.outputs {
        std::fs::write(dir.join(&o.name), &o.bytes)?;
        manifest
            .outputs
            .push((o.name.clone(), sha256_hex(&o.bytes)));
    }
    Ok(())
}

/// Runs one experiment, writing its outputs and manifest into `cfg.out`.
///
/// The returned manifest carries the exit status; it is written even when
/// the run fails. Trajectory results are combined in a fixed order, so the
/// outputs do not depend on `cfg.workers`.
pub fn run(cfg: &ExperimentConfig) -> RunManifest {
    let start = Instant::now();
    let dir = Path::new(&cfg.out);
    let mut manifest = RunManifest::new(emit_config(cfg));
    manifest.kind = Some(cfg.kind);
    manifest.seed = Some(cfg.seed);
    manifest.workers = cfg.workers;
    log::info!("running {} with seed {}", cfg.kind, cfg.seed);
    if let Err(e) = execute(cfg, dir, &mut manifest) {
        log::error!("{e}");
        manifest.status = Status::from_exit_code(e.exit_code());
        manifest.error = Some(e.to_string());
    }
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = manifest.write_to(dir) {
        log::error!("cannot write manifest: {e}");
        if manifest.status == Status::Ok {
            manifest.status = Status::Failed;
            manifest.error = Some(format!("cannot write manifest: {e}"));
        }
    }
    manifest
}

/// Manifest for a configuration that never got as far as running.
pub fn rejected(config_text: &str, error: &CliError, dir: &Path) -> RunManifest {
    let mut manifest = RunManifest::new(config_text.to_string());
    manifest.status = Status::from_exit_code(error.exit_code());
    manifest.error = Some(error.to_string());
    if let Err(e) = manifest.write_to(dir) {
        log::error!("cannot write manifest: {e}");
    }
    manifest
}
