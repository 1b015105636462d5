use crate::error::{Error, Result};
use crate::thermo::PotentialSpec;
use std::io::{BufRead, Write};

/// Positions of a periodic chain: stretches `r_x = q_{x+1} − q_x` for
/// unpinned chains or displacements `q_x` for pinned ones.
#[derive(Clone, Debug, PartialEq)]
pub enum Configuration {
    Stretch(Vec<f64>),
    Displacement(Vec<f64>),
}

impl Configuration {
    pub fn values(&self) -> &[f64] {
        match self {
            Configuration::Stretch(v) | Configuration::Displacement(v) => v,
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match self {
            Configuration::Stretch(v) | Configuration::Displacement(v) => v,
        }
    }

    pub fn is_stretch(&self) -> bool {
        matches!(self, Configuration::Stretch(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub momenta: Vec<f64>,
    pub config: Configuration,
    pub time: f64,
}

impl ChainState {
    pub fn new(momenta: Vec<f64>, config: Configuration) -> Result<Self> {
        let n = momenta.len();
        if n < 3 {
            return Err(Error::Config(format!(
                "a chain needs at least 3 sites, got {n}"
            )));
        }
        if config.values().len() != n {
            return Err(Error::Config(format!(
                "momenta have {n} entries but the configuration has {}",
                config.values().len()
            )));
        }
        Ok(Self {
            momenta,
            config,
            time: 0.0,
        })
    }

    /// Chain at rest in the representation matching `spec`.
    pub fn at_rest(spec: &PotentialSpec, n_sites: usize) -> Result<Self> {
        let zeros = vec![0.0; n_sites];
        let config = if spec.is_pinned() {
            Configuration::Displacement(zeros.clone())
        } else {
            Configuration::Stretch(zeros.clone())
        };
        Self::new(zeros, config)
    }

    pub fn n_sites(&self) -> usize {
        self.momenta.len()
    }

    /// Checks that the representation matches the pinning of `spec`.
    pub fn check_representation(&self, spec: &PotentialSpec) -> Result<()> {
        if spec.is_pinned() == self.config.is_stretch() {
            return Err(Error::Config(if spec.is_pinned() {
                "pinned chains are stored as displacements q_x".into()
            } else {
                "unpinned chains are stored as stretches r_x".into()
            }));
        }
        Ok(())
    }

    /// Stretch of bond `(x, x+1)` in either representation.
    #[inline]
    pub fn stretch(&self, x: usize) -> f64 {
        match &self.config {
            Configuration::Stretch(r) => r[x],
            Configuration::Displacement(q) => q[(x + 1) % q.len()] - q[x],
        }
    }

    /// Displacements; for the stretch representation they are reconstructed
    /// by a cumulative sum in the mean-zero gauge. A nonzero total stretch
    /// (a global strain) is removed as a uniform gradient first.
    pub fn displacements(&self) -> Vec<f64> {
        match &self.config {
            Configuration::Displacement(q) => q.clone(),
            Configuration::Stretch(r) => {
                let n = r.len();
                let mean = r.iter().sum::<f64>() / n as f64;
                let mut q = Vec::with_capacity(n);
                let mut acc = 0.0;
                for &rx in r {
                    q.push(acc);
                    acc += rx - mean;
                }
                let shift = q.iter().sum::<f64>() / n as f64;
                q.iter_mut().for_each(|v| *v -= shift);
                q
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.momenta.iter().all(|p| p.is_finite())
            && self.config.values().iter().all(|x| x.is_finite())
    }

    /// Snapshot as CSV `x,p,r` or `x,p,q`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# time = {:e}", self.time)?;
        writeln!(
            w,
            "x,p,{}",
            if self.config.is_stretch() { "r" } else { "q" }
        )?;
        for (x, (p, c)) in self.momenta.iter().zip(self.config.values()).enumerate() {
            writeln!(w, "{x},{p:e},{c:e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut time = 0.0;
        let mut stretch = None;
        let (mut p, mut c) = (Vec::new(), Vec::new());
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some(("time", v)) = meta.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                    time = v
                        .parse()
                        .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
                }
                continue;
            }
            if stretch.is_none() {
                stretch = Some(match line {
                    "x,p,r" => true,
                    "x,p,q" => false,
                    _ => {
                        return Err(Error::Config(format!(
                            "line {}: expected header x,p,r or x,p,q",
                            lineno + 1
                        )))
                    }
                });
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Config(format!(
                    "line {}: expected 3 columns",
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))
            };
            p.push(parse(cols[1])?);
            c.push(parse(cols[2])?);
        }
        let config = match stretch {
            Some(true) => Configuration::Stretch(c),
            Some(false) => Configuration::Displacement(c),
            None => return Err(Error::Config("empty state file".into())),
        };
        let mut s = Self::new(p, config)?;
        s.time = time;
        Ok(s)
    }
}

/// Conserved functionals of a chain and their drift from a reference state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservationReport {
    pub total_energy: f64,
    pub total_momentum: f64,
    pub total_stretch: f64,
    pub energy_drift: f64,
    pub momentum_drift: f64,
    pub stretch_drift: f64,
}

impl ConservationReport {
    pub fn measure(state: &ChainState, spec: &PotentialSpec) -> Self {
        let n = state.n_sites();
        let total_energy = super::currents::total_energy(state, spec);
        let total_momentum = state.momenta.iter().sum();
        let total_stretch = (0..n).map(|x| state.stretch(x)).sum();
        Self {
            total_energy,
            total_momentum,
            total_stretch,
            energy_drift: 0.0,
            momentum_drift: 0.0,
            stretch_drift: 0.0,
        }
    }

    /// Report for `state` with drifts relative to `initial`.
    pub fn relative_to(initial: &ChainState, state: &ChainState, spec: &PotentialSpec) -> Self {
        let a = Self::measure(initial, spec);
        let mut b = Self::measure(state, spec);
        b.energy_drift = b.total_energy - a.total_energy;
        b.momentum_drift = b.total_momentum - a.total_momentum;
        b.stretch_drift = b.total_stretch - a.total_stretch;
        b
    }
}
