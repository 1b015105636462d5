//! Line-oriented experiment configuration.
//!
//! ```text
//! kind = green-kubo
//! seed = 7
//!
//! [model]
//! pinning = quadratic
//! nu = 1.0
//! ```
//!
//! Keys before the first header belong to `[run]`. `#` starts a comment.
//! Every problem found is reported with its line number, not just the first.

use chainlab::kinetics::{DispersionSpec, KernelSpec, TabulatedKernel, MIN_TRAJECTORIES};
use chainlab::observables::ChiMode;
use chainlab::thermo::{Interpolation, Pinning, PotentialSpec};
use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    ChainRun,
    GreenKubo,
    PhononMc,
    Transport,
    FracHeat,
    Euler,
    ThermoTable,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::ChainRun,
        Kind::GreenKubo,
        Kind::PhononMc,
        Kind::Transport,
        Kind::FracHeat,
        Kind::Euler,
        Kind::ThermoTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::ChainRun => "chain-run",
            Kind::GreenKubo => "green-kubo",
            Kind::PhononMc => "phonon-mc",
            Kind::Transport => "transport",
            Kind::FracHeat => "frac-heat",
            Kind::Euler => "euler",
            Kind::ThermoTable => "thermo-table",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind '{s}'"))
    }
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(
                        "expected one of {}, got '{s}'",
                        [$($text),+].join(" | ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(PotentialKind { Harmonic => "harmonic", Fpu => "fpu" });
keyword_enum!(PinningKind { None => "none", Quadratic => "quadratic", Quartic => "quartic" });
keyword_enum!(DispersionKind { Unpinned => "unpinned", Pinned => "pinned" });
keyword_enum!(KernelKind { Product => "product", Constant => "constant", Exchange => "exchange" });
keyword_enum!(EstimatorKind { CharFn => "charfn", Quantile => "quantile" });
keyword_enum!(ChiKind { TemperatureSquared => "t2", Susceptibility => "susceptibility" });
keyword_enum!(InterpolationKind { Linear => "linear", Cubic => "cubic" });

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub potential: PotentialKind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub pinning: PinningKind,
    pub nu: f64,
    pub g: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n_sites: usize,
    pub dt: f64,
    pub t_max: f64,
    pub burn_in: f64,
    pub sample_every: usize,
    pub mcmc_sweeps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenKuboConfig {
    pub lag_max: f64,
    pub n_trajectories: usize,
    pub blocks: usize,
    pub chi: ChiKind,
    pub susceptibility_draws: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KineticsConfig {
    pub dispersion: DispersionKind,
    pub omega_c: f64,
    pub omega_nu: f64,
    pub kernel: KernelKind,
    pub kernel_strength: f64,
    pub kernel_points: usize,
    pub n_trajectories: usize,
    pub horizons: Vec<f64>,
    pub method: EstimatorKind,
    pub bootstrap: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportConfig {
    pub n_y: usize,
    pub n_k: usize,
    pub origin: f64,
    pub length: f64,
    pub cfl: f64,
    pub t_max: f64,
    /// Standard deviation of the initial Gaussian in `y`.
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FracConfig {
    pub alpha: f64,
    pub diffusivity: f64,
    pub n: usize,
    pub origin: f64,
    pub length: f64,
    pub t_max: f64,
    pub y0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerConfig {
    pub cells: usize,
    pub cfl: f64,
    pub t_max: f64,
    pub r_amp: f64,
    pub p_amp: f64,
    /// Internal energy offset: `e = e0 + p²/2 + V(r)`.
    pub e0: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub n_r: usize,
    pub n_u: usize,
    pub interpolation: InterpolationKind,
}

/// Fully validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub out: String,
    pub workers: usize,
    pub model: ModelConfig,
    pub chain: ChainConfig,
    pub green_kubo: GreenKuboConfig,
    pub kinetics: KineticsConfig,
    pub transport: TransportConfig,
    pub frac: FracConfig,
    pub euler: EulerConfig,
    pub table: TableConfig,
}

impl ExperimentConfig {
    /// Documented defaults for `kind`.
    pub fn defaults(kind: Kind) -> Self {
        Self {
            kind,
            seed: 1,
            out: "out".into(),
            workers: 1,
            model: ModelConfig {
                potential: PotentialKind::Harmonic,
                a: 1.0,
                b: 0.0,
                c: 0.0,
                pinning: PinningKind::None,
                nu: 1.0,
                g: 0.0,
                beta: 1.0,
                gamma: 1.0,
            },
            chain: ChainConfig {
                n_sites: 64,
                dt: 0.04,
                t_max: 100.0,
                burn_in: 0.0,
                sample_every: 10,
                mcmc_sweeps: 100,
            },
            green_kubo: GreenKuboConfig {
                lag_max: 10.0,
                n_trajectories: 4,
                blocks: 8,
                chi: ChiKind::TemperatureSquared,
                susceptibility_draws: 100,
            },
            kinetics: KineticsConfig {
                dispersion: DispersionKind::Unpinned,
                omega_c: 2.0,
                omega_nu: 1.0,
                kernel: KernelKind::Product,
                kernel_strength: 1.0,
                kernel_points: 128,
                n_trajectories: MIN_TRAJECTORIES,
                horizons: vec![8.0, 32.0, 128.0, 512.0],
                method: EstimatorKind::CharFn,
                bootstrap: 100,
            },
            transport: TransportConfig {
                n_y: 128,
                n_k: 32,
                origin: -10.0,
                length: 20.0,
                cfl: 0.5,
                t_max: 2.0,
                width: 1.0,
            },
            frac: FracConfig {
                alpha: 1.5,
                diffusivity: 1.0,
                n: 256,
                origin: -20.0,
                length: 40.0,
                t_max: 1.0,
                y0: 0.0,
            },
            euler: EulerConfig {
                cells: 256,
                cfl: 0.4,
                t_max: 0.3,
                r_amp: 0.1,
                p_amp: 0.05,
                e0: 1.5,
            },
            table: TableConfig {
                r_min: -0.6,
                r_max: 0.6,
                u_min: 0.8,
                u_max: 3.0,
                n_r: 61,
                n_u: 61,
                interpolation: InterpolationKind::Cubic,
            },
        }
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.model.beta
    }

    pub fn potential(&self) -> PotentialSpec {
        let m = &self.model;
        let base = match m.potential {
            PotentialKind::Harmonic => PotentialSpec::harmonic(m.a),
            PotentialKind::Fpu => PotentialSpec::fpu(m.a, m.b, m.c),
        };
        match m.pinning {
            PinningKind::None => base,
            PinningKind::Quadratic => base.with_pinning(Pinning::Quadratic { nu: m.nu }),
            PinningKind::Quartic => base.with_pinning(Pinning::Quartic { nu: m.nu, g: m.g }),
        }
    }

    pub fn dispersion(&self) -> DispersionSpec {
        let k = &self.kinetics;
        match k.dispersion {
            DispersionKind::Unpinned => DispersionSpec::Unpinned { c: k.omega_c },
            DispersionKind::Pinned => DispersionSpec::Pinned {
                c: k.omega_c,
                nu: k.omega_nu,
            },
        }
    }

    pub fn kernel(&self) -> chainlab::Result<KernelSpec> {
        let k = &self.kinetics;
        Ok(match k.kernel {
            KernelKind::Product => KernelSpec::Product {
                strength: k.kernel_strength,
            },
            KernelKind::Constant => KernelSpec::Constant {
                value: k.kernel_strength,
            },
            KernelKind::Exchange => {
                KernelSpec::Tabulated(TabulatedKernel::momentum_exchange(k.kernel_points)?)
            }
        })
    }

    pub fn chi_mode(&self) -> ChiMode {
        match self.green_kubo.chi {
            ChiKind::TemperatureSquared => ChiMode::TemperatureSquared,
            ChiKind::Susceptibility => ChiMode::Susceptibility,
        }
    }

    pub fn interpolation(&self) -> Interpolation {
        match self.table.interpolation {
            InterpolationKind::Linear => Interpolation::Linear,
            InterpolationKind::Cubic => Interpolation::Cubic,
        }
    }
}

/// One problem in a configuration text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line number, absent for missing keys.
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: ")?,
            None => f.write_str("config: ")?,
        }
        if let Some(k) = &self.key {
            write!(f, "{k}: ")?;
        }
        f.write_str(&self.message)
    }
}

/// All problems found in a configuration text.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_char('\n')?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn split_entries(text: &str, errors: &mut Vec<ConfigError>) -> Vec<Entry> {
    let mut section = "run".to_string();
    let mut seen: HashMap<(String, String), usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => section = name.trim().to_string(),
                _ => errors.push(ConfigError {
                    line: Some(line),
                    key: None,
                    message: format!("malformed section header '{body}'"),
                }),
            }
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            errors.push(ConfigError {
                line: Some(line),
                key: None,
                message: format!("expected 'key = value', got '{body}'"),
            });
            continue;
        };
        let key = k.trim().to_string();
        if let Some(first) = seen.insert((section.clone(), key.clone()), line) {
            errors.push(ConfigError {
                line: Some(line),
                key: Some(format!("{section}.{key}")),
                message: format!("duplicate key (first set on line {first})"),
            });
            continue;
        }
        out.push(Entry {
            line,
            section: section.clone(),
            key,
            value: v.trim().to_string(),
        });
    }
    out
}

fn parse_value<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>()
        .map_err(|e| format!("cannot parse '{v}': {e}"))
}

fn parse_float(v: &str) -> Result<f64, String> {
    let x: f64 = parse_value(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{v}' is not a finite number"))
    }
}

fn parse_floats(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| parse_float(s.trim())).collect()
}

/// Assigns one entry; returns `Err` for unknown keys and type mismatches.
fn assign(cfg: &mut ExperimentConfig, e: &Entry) -> Result<(), String> {
    let v = e.value.as_str();
    macro_rules! set {
        ($field:expr, float) => {
            $field = parse_float(v)?
        };
        ($field:expr, parse) => {
            $field = parse_value(v)?
        };
    }
    match (e.section.as_str(), e.key.as_str()) {
        ("run", "kind") => set!(cfg.kind, parse),
        ("run", "seed") => set!(cfg.seed, parse),
        ("run", "out") => cfg.out = v.to_string(),
        ("run", "workers") => set!(cfg.workers, parse),

        ("model", "potential") => set!(cfg.model.potential, parse),
        ("model", "a") => set!(cfg.model.a, float),
        ("model", "b") => set!(cfg.model.b, float),
        ("model", "c") => set!(cfg.model.c, float),
        ("model", "pinning") => set!(cfg.model.pinning, parse),
        ("model", "nu") => set!(cfg.model.nu, float),
        ("model", "g") => set!(cfg.model.g, float),
        ("model", "beta") => set!(cfg.model.beta, float),
        ("model", "gamma") => set!(cfg.model.gamma, float),

        ("chain", "n_sites") => set!(cfg.chain.n_sites, parse),
        ("chain", "dt") => set!(cfg.chain.dt, float),
        ("chain", "t_max") => set!(cfg.chain.t_max, float),
        ("chain", "burn_in") => set!(cfg.chain.burn_in, float),
        ("chain", "sample_every") => set!(cfg.chain.sample_every, parse),
        ("chain", "mcmc_sweeps") => set!(cfg.chain.mcmc_sweeps, parse),

        ("green_kubo", "lag_max") => set!(cfg.green_kubo.lag_max, float),
        ("green_kubo", "n_trajectories") => set!(cfg.green_kubo.n_trajectories, parse),
        ("green_kubo", "blocks") => set!(cfg.green_kubo.blocks, parse),
        ("green_kubo", "chi") => set!(cfg.green_kubo.chi, parse),
        ("green_kubo", "susceptibility_draws") => {
            set!(cfg.green_kubo.susceptibility_draws, parse)
        }

        ("kinetics", "dispersion") => set!(cfg.kinetics.dispersion, parse),
        ("kinetics", "omega_c") => set!(cfg.kinetics.omega_c, float),
        ("kinetics", "omega_nu") => set!(cfg.kinetics.omega_nu, float),
        ("kinetics", "kernel") => set!(cfg.kinetics.kernel, parse),
        ("kinetics", "kernel_strength") => set!(cfg.kinetics.kernel_strength, float),
        ("kinetics", "kernel_points") => set!(cfg.kinetics.kernel_points, parse),
        ("kinetics", "n_trajectories") => set!(cfg.kinetics.n_trajectories, parse),
        ("kinetics", "horizons") => cfg.kinetics.horizons = parse_floats(v)?,
        ("kinetics", "method") => set!(cfg.kinetics.method, parse),
        ("kinetics", "bootstrap") => set!(cfg.kinetics.bootstrap, parse),

        ("transport", "n_y") => set!(cfg.transport.n_y, parse),
        ("transport", "n_k") => set!(cfg.transport.n_k, parse),
        ("transport", "origin") => set!(cfg.transport.origin, float),
        ("transport", "length") => set!(cfg.transport.length, float),
        ("transport", "cfl") => set!(cfg.transport.cfl, float),
        ("transport", "t_max") => set!(cfg.transport.t_max, float),
        ("transport", "width") => set!(cfg.transport.width, float),

        ("frac_heat", "alpha") => set!(cfg.frac.alpha, float),
        ("frac_heat", "diffusivity") => set!(cfg.frac.diffusivity, float),
        ("frac_heat", "n") => set!(cfg.frac.n, parse),
        ("frac_heat", "origin") => set!(cfg.frac.origin, float),
        ("frac_heat", "length") => set!(cfg.frac.length, float),
        ("frac_heat", "t_max") => set!(cfg.frac.t_max, float),
        ("frac_heat", "y0") => set!(cfg.frac.y0, float),

        ("euler", "cells") => set!(cfg.euler.cells, parse),
        ("euler", "cfl") => set!(cfg.euler.cfl, float),
        ("euler", "t_max") => set!(cfg.euler.t_max, float),
        ("euler", "r_amp") => set!(cfg.euler.r_amp, float),
        ("euler", "p_amp") => set!(cfg.euler.p_amp, float),
        ("euler", "e0") => set!(cfg.euler.e0, float),

        ("table", "r_min") => set!(cfg.table.r_min, float),
        ("table", "r_max") => set!(cfg.table.r_max, float),
        ("table", "u_min") => set!(cfg.table.u_min, float),
        ("table", "u_max") => set!(cfg.table.u_max, float),
        ("table", "n_r") => set!(cfg.table.n_r, parse),
        ("table", "n_u") => set!(cfg.table.n_u, parse),
        ("table", "interpolation") => set!(cfg.table.interpolation, parse),

        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Constraint checks: `(section.key, message)` for each violation.
fn constraints(cfg: &ExperimentConfig) -> Vec<(&'static str, String)> {
    let mut v = Vec::new();
    let mut need = |ok: bool, key: &'static str, msg: &str| {
        if !ok {
            v.push((key, msg.to_string()));
        }
    };
    need(cfg.workers >= 1, "run.workers", "must be >= 1");
    need(!cfg.out.is_empty(), "run.out", "must not be empty");

    let m = &cfg.model;
    need(m.a > 0.0, "model.a", "must be > 0");
    need(
        m.potential != PotentialKind::Fpu || m.c > 0.0,
        "model.c",
        "the quartic coefficient must be > 0 for fpu",
    );
    need(m.nu >= 0.0, "model.nu", "must be >= 0");
    need(m.g >= 0.0, "model.g", "must be >= 0");
    need(m.beta > 0.0, "model.beta", "must be > 0");
    need(m.gamma >= 0.0, "model.gamma", "must be >= 0");

    let c = &cfg.chain;
    need(c.n_sites >= 3, "chain.n_sites", "must be >= 3");
    need(c.dt > 0.0, "chain.dt", "must be > 0");
    need(c.t_max > 0.0, "chain.t_max", "must be > 0");
    need(c.burn_in >= 0.0, "chain.burn_in", "must be >= 0");
    need(c.sample_every >= 1, "chain.sample_every", "must be >= 1");

    let g = &cfg.green_kubo;
    need(g.lag_max > 0.0, "green_kubo.lag_max", "must be > 0");
    need(
        g.lag_max < c.t_max,
        "green_kubo.lag_max",
        "must be below chain.t_max",
    );
    need(
        g.n_trajectories >= 1,
        "green_kubo.n_trajectories",
        "must be >= 1",
    );
    need(g.blocks >= 1, "green_kubo.blocks", "must be >= 1");
    need(
        g.susceptibility_draws >= 4,
        "green_kubo.susceptibility_draws",
        "must be >= 4",
    );

    let k = &cfg.kinetics;
    need(k.omega_c > 0.0, "kinetics.omega_c", "must be > 0");
    need(k.omega_nu >= 0.0, "kinetics.omega_nu", "must be >= 0");
    need(
        k.kernel_strength > 0.0,
        "kinetics.kernel_strength",
        "must be > 0",
    );
    need(
        k.kernel_points >= 4,
        "kinetics.kernel_points",
        "must be >= 4",
    );
    need(
        k.n_trajectories >= MIN_TRAJECTORIES,
        "kinetics.n_trajectories",
        &format!("must be >= {MIN_TRAJECTORIES}"),
    );
    need(
        !k.horizons.is_empty() && k.horizons[0] > 0.0 && k.horizons.windows(2).all(|w| w[1] > w[0]),
        "kinetics.horizons",
        "must be positive and strictly increasing",
    );
    need(
        k.method != EstimatorKind::Quantile || k.horizons.len() >= 2,
        "kinetics.horizons",
        "the quantile estimator needs at least two horizons",
    );

    let t = &cfg.transport;
    need(t.n_y >= 2, "transport.n_y", "must be >= 2");
    need(t.n_k >= 2, "transport.n_k", "must be >= 2");
    need(t.length > 0.0, "transport.length", "must be > 0");
    need(
        t.cfl > 0.0 && t.cfl < 1.0,
        "transport.cfl",
        "must lie in (0, 1)",
    );
    need(t.t_max >= 0.0, "transport.t_max", "must be >= 0");
    need(t.width > 0.0, "transport.width", "must be > 0");

    let f = &cfg.frac;
    need(
        f.alpha > 0.0 && f.alpha <= 2.0,
        "frac_heat.alpha",
        "must lie in (0, 2]",
    );
    need(f.diffusivity > 0.0, "frac_heat.diffusivity", "must be > 0");
    need(
        f.n >= 2 && f.n.is_power_of_two(),
        "frac_heat.n",
        "must be a power of two >= 2",
    );
    need(f.length > 0.0, "frac_heat.length", "must be > 0");
    need(f.t_max >= 0.0, "frac_heat.t_max", "must be >= 0");

    let e = &cfg.euler;
    need(e.cells >= 3, "euler.cells", "must be >= 3");
    need(
        e.cfl > 0.0 && e.cfl <= 0.5,
        "euler.cfl",
        "must lie in (0, 0.5]",
    );
    need(e.t_max >= 0.0, "euler.t_max", "must be >= 0");

    let tb = &cfg.table;
    need(
        tb.r_max > tb.r_min,
        "table.r_max",
        "must exceed table.r_min",
    );
    need(
        tb.u_max > tb.u_min,
        "table.u_max",
        "must exceed table.u_min",
    );
    need(tb.n_r >= 4, "table.n_r", "must be >= 4");
    need(tb.n_u >= 4, "table.n_u", "must be >= 4");
    v
}

/// Parses and validates a configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let entries = split_entries(text, &mut errors);
    let kind_entry = entries
        .iter()
        .find(|e| e.section == "run" && e.key == "kind");
    let kind = match kind_entry {
        None => {
            errors.push(ConfigError {
                line: None,
                key: Some("run.kind".into()),
                message: "missing required key".into(),
            });
            Kind::ChainRun
        }
        Some(e) => e.value.parse().unwrap_or(Kind::ChainRun),
    };
    let mut cfg = ExperimentConfig::defaults(kind);
    let mut lines: HashMap<String, usize> = HashMap::new();
    for e in &entries {
        let name = format!("{}.{}", e.section, e.key);
        match assign(&mut cfg, e) {
            Ok(()) => {
                lines.insert(name, e.line);
            }
            Err(message) => errors.push(ConfigError {
                line: Some(e.line),
                key: Some(name),
                message,
            }),
        }
    }
    for (key, message) in constraints(&cfg) {
        errors.push(ConfigError {
            line: lines.get(key).copied(),
            key: Some(key.to_string()),
            message,
        });
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(ConfigErrors(errors))
    }
}

/// Validates a config built in code, with the same rules as [`parse_config`].
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigErrors> {
    let errors: Vec<ConfigError> = constraints(cfg)
        .into_iter()
        .map(|(key, message)| ConfigError {
            line: None,
            key: Some(key.into()),
            message,
        })
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ConfigErrors(errors))
    }
}

/// Writes every field; `parse_config(&emit_config(c))` returns `c`.
pub fn emit_config(cfg: &ExperimentConfig) -> String {
    let mut s = String::new();
    macro_rules! put {
        ($($k:literal => $v:expr),+ $(,)?) => {
            $( writeln!(s, "{} = {}", $k, $v).unwrap(); )+
        };
    }
    put!("kind" => cfg.kind, "seed" => cfg.seed, "out" => cfg.out, "workers" => cfg.workers);
    let m = &cfg.model;
    s.push_str("\n[model]\n");
    put!("potential" => m.potential, "a" => m.a, "b" => m.b, "c" => m.c,
         "pinning" => m.pinning, "nu" => m.nu, "g" => m.g, "beta" => m.beta,
         "gamma" => m.gamma);
    let c = &cfg.chain;
    s.push_str("\n[chain]\n");
    put!("n_sites" => c.n_sites, "dt" => c.dt, "t_max" => c.t_max,
         "burn_in" => c.burn_in, "sample_every" => c.sample_every,
         "mcmc_sweeps" => c.mcmc_sweeps);
    let g = &cfg.green_kubo;
    s.push_str("\n[green_kubo]\n");
    put!("lag_max" => g.lag_max, "n_trajectories" => g.n_trajectories,
         "blocks" => g.blocks, "chi" => g.chi,
         "susceptibility_draws" => g.susceptibility_draws);
    let k = &cfg.kinetics;
    let horizons: Vec<String> = k.horizons.iter().map(|h| h.to_string()).collect();
    s.push_str("\n[kinetics]\n");
    put!("dispersion" => k.dispersion, "omega_c" => k.omega_c,
         "omega_nu" => k.omega_nu, "kernel" => k.kernel,
         "kernel_strength" => k.kernel_strength, "kernel_points" => k.kernel_points,
         "n_trajectories" => k.n_trajectories, "horizons" => horizons.join(", "),
         "method" => k.method, "bootstrap" => k.bootstrap);
    let t = &cfg.transport;
    s.push_str("\n[transport]\n");
    put!("n_y" => t.n_y, "n_k" => t.n_k, "origin" => t.origin, "length" => t.length,
         "cfl" => t.cfl, "t_max" => t.t_max, "width" => t.width);
    let f = &cfg.frac;
    s.push_str("\n[frac_heat]\n");
    put!("alpha" => f.alpha, "diffusivity" => f.diffusivity, "n" => f.n,
         "origin" => f.origin, "length" => f.length, "t_max" => f.t_max, "y0" => f.y0);
    let e = &cfg.euler;
    s.push_str("\n[euler]\n");
    put!("cells" => e.cells, "cfl" => e.cfl, "t_max" => e.t_max, "r_amp" => e.r_amp,
         "p_amp" => e.p_amp, "e0" => e.e0);
    let tb = &cfg.table;
    s.push_str("\n[table]\n");
    put!("r_min" => tb.r_min, "r_max" => tb.r_max, "u_min" => tb.u_min,
         "u_max" => tb.u_max, "n_r" => tb.n_r, "n_u" => tb.n_u,
         "interpolation" => tb.interpolation);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("kind = chain-run\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::defaults(Kind::ChainRun));
    }

    #[test]
    fn negative_beta_names_the_key() {
        let err = parse_config("kind = chain-run\n[model]\nbeta = -1\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].key.as_deref(), Some("model.beta"));
        assert_eq!(err.0[0].line, Some(3));
    }

    #[test]
    fn all_errors_are_reported() {
        let text = "kind = euler\nbogus = 1\n[chain]\ndt = fast\n[euler]\ncells = 2\n[nope\n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(2), Some(4), Some(6), Some(7)]);
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn duplicate_and_missing_kind() {
        let err = parse_config("seed = 1\nseed = 2\n").unwrap_err();
        assert!(err.0.iter().any(|e| e.message.contains("duplicate")));
        assert!(err.0.iter().any(|e| e.key.as_deref() == Some("run.kind")));
    }
}
