use super::partition::support;
use super::potential::{Interaction, PotentialSpec};
use crate::dynamics::{ChainState, Configuration};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::stats::LinearDensityTable;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const TABLE_CELLS: usize = 16384;

/// Draws i.i.d. stretches from `∝ exp(-βV(r) + λr)`.
///
/// Gaussian for harmonic interactions, otherwise inverse-CDF sampling from a
/// table with piecewise-linear density.
#[derive(Clone, Debug)]
pub struct StretchSampler {
    kind: SamplerKind,
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Gaussian { mean: f64, sd: f64 },
    Table(LinearDensityTable),
}

impl StretchSampler {
    pub fn new(spec: &PotentialSpec, lambda: f64, beta: f64) -> Result<Self> {
        let s = support(spec, lambda, beta)?;
        let quadratic = match &spec.interaction {
            Interaction::Harmonic { a } => Some(*a),
            Interaction::Fpu { a, b, c } if *b == 0.0 && *c == 0.0 => Some(*a),
            _ => None,
        };
        if let Some(a) = quadratic {
            return Ok(Self {
                kind: SamplerKind::Gaussian {
                    mean: lambda / (beta * a),
                    sd: 1.0 / (beta * a).sqrt(),
                },
            });
        }
        let h = (s.hi - s.lo) / TABLE_CELLS as f64;
        let density: Vec<f64> = (0..=TABLE_CELLS)
            .map(|i| {
                let r = s.lo + h * i as f64;
                (-beta * spec.v(r) + lambda * r - s.log_peak).exp()
            })
            .collect();
        Ok(Self {
            kind: SamplerKind::Table(LinearDensityTable::new(s.lo, s.hi, density)),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            SamplerKind::Table(t) => t.quantile(rng.random::<f64>()),
        }
    }

    /// CDF of the sampled law (the tabulated one for non-Gaussian laws).
    pub fn cdf(&self, r: f64) -> f64 {
        match &self.kind {
            SamplerKind::Gaussian { mean, sd } => {
                0.5 * erfc(-(r - mean) / (sd * std::f64::consts::SQRT_2))
            }
            SamplerKind::Table(t) => t.cdf(r),
        }
    }
}

/// Complementary error function with about 1e-7 relative accuracy.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// Independent draw from the product measure with multipliers `(λ, π, β)`:
/// momenta `N(π, 1/β)`, stretches `∝ exp(-βV(r) + λr)`.
pub fn sample_equilibrium<R: Rng + ?Sized>(
    spec: &PotentialSpec,
    lambda: f64,
    pi: f64,
    beta: f64,
    n_sites: usize,
    rng: &mut R,
) -> Result<ChainState> {
    if spec.is_pinned() {
        return Err(Error::Unsupported(
            "the pinned Gibbs measure is not a product measure; use sample_gibbs_mcmc".into(),
        ));
    }
    let sampler = StretchSampler::new(spec, lambda, beta)?;
    sample_with(&sampler, pi, beta, n_sites, rng)
}

/// Like [`sample_equilibrium`] but reuses a prepared stretch sampler.
pub fn sample_with<R: Rng + ?Sized>(
    sampler: &StretchSampler,
    pi: f64,
    beta: f64,
    n_sites: usize,
    rng: &mut R,
) -> Result<ChainState> {
    let sd = 1.0 / beta.sqrt();
    let momenta: Vec<f64> = (0..n_sites)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            pi + sd * z
        })
        .collect();
    let r: Vec<f64> = (0..n_sites).map(|_| sampler.sample(rng)).collect();
    ChainState::new(momenta, Configuration::Stretch(r))
}

/// Gibbs state of a pinned chain at inverse temperature `β`.
///
/// Momenta are drawn exactly; displacements start at rest and are updated by
/// `sweeps` sweeps of single-site Metropolis moves. With `sweeps = 0` the
/// displacements stay at the ground state.
pub fn sample_gibbs_mcmc<R: Rng + ?Sized>(
    spec: &PotentialSpec,
    beta: f64,
    n_sites: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<ChainState> {
    spec.validate()?;
    if !spec.is_pinned() {
        return Err(Error::Unsupported(
            "sample_gibbs_mcmc targets pinned chains; use sample_equilibrium".into(),
        ));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Config(format!("beta must be positive, got {beta}")));
    }
    let mut state = ChainState::at_rest(spec, n_sites)?;
    let sd = 1.0 / beta.sqrt();
    for p in state.momenta.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *p = sd * z;
    }
    gibbs_sweeps(spec, beta, &mut state, sweeps, rng)?;
    Ok(state)
}

/// Continues a pinned Metropolis chain for `sweeps` further sweeps over the
/// displacements; momenta are left untouched.
pub fn gibbs_sweeps<R: Rng + ?Sized>(
    spec: &PotentialSpec,
    beta: f64,
    state: &mut ChainState,
    sweeps: usize,
    rng: &mut R,
) -> Result<()> {
    state.check_representation(spec)?;
    if !spec.is_pinned() {
        return Err(Error::Unsupported(
            "Metropolis sweeps act on pinned chains only".into(),
        ));
    }
    let curvature = (spec.d2w(0.0) + 2.0 * spec.d2v(0.0)).max(1e-3);
    let step = 2.0 / (beta * curvature).sqrt();
    let n = state.n_sites();
    let q = state.config.values_mut();
    for _ in 0..sweeps {
        for x in 0..n {
            let (left, right) = (q[(x + n - 1) % n], q[(x + 1) % n]);
            let local = |v: f64| spec.v(right - v) + spec.v(v - left) + spec.w(v);
            let old = q[x];
            let new = old + step * (2.0 * rng.random::<f64>() - 1.0);
            let d = beta * (local(new) - local(old));
            if d <= 0.0 || rng.random::<f64>() < (-d).exp() {
                q[x] = new;
            }
        }
    }
    Ok(())
}

/// Mean and standard error of `⟨V'(r)⟩` under the stretch marginal, by
/// direct sampling. Used as a check on the thermodynamic pressure.
pub fn pressure_monte_carlo<R: Rng + ?Sized>(
    spec: &PotentialSpec,
    lambda: f64,
    beta: f64,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let sampler = StretchSampler::new(spec, lambda, beta)?;
    let acc: crate::stats::Running = (0..n).map(|_| spec.dv(sampler.sample(rng))).collect();
    Ok((acc.mean(), acc.std_error()))
}

/// Normalized CDF of the stretch marginal at `r`, by adaptive quadrature.
pub fn stretch_cdf(spec: &PotentialSpec, lambda: f64, beta: f64, r: f64) -> Result<f64> {
    let s = support(spec, lambda, beta)?;
    let f = |x: f64| (-beta * spec.v(x) + lambda * x - s.log_peak).exp();
    let total = integrate(f, s.lo, s.hi, 1e-12, 0.0);
    if r <= s.lo {
        return Ok(0.0);
    }
    if r >= s.hi {
        return Ok(1.0);
    }
    Ok(integrate(f, s.lo, r, 1e-12, 0.0) / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn erfc_reference_values() {
        assert!((erfc(0.0) - 1.0).abs() < 1e-7);
        assert!((erfc(1.0) - 0.157_299_207_050_285_1).abs() < 1e-7);
        assert!((erfc(-0.5) - 1.520_499_877_813_046_5).abs() < 1e-7);
    }

    #[test]
    fn tabulated_cdf_matches_quadrature() {
        let spec = PotentialSpec::fpu(1.0, 0.3, 1.0);
        let s = StretchSampler::new(&spec, 0.5, 1.2).unwrap();
        for &r in &[-1.0, -0.2, 0.4, 1.1] {
            let exact = stretch_cdf(&spec, 0.5, 1.2, r).unwrap();
            assert!((s.cdf(r) - exact).abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn zero_sweeps_keep_ground_state() {
        let spec =
            PotentialSpec::harmonic(1.0).with_pinning(super::super::Pinning::Quadratic { nu: 1.0 });
        let s = sample_gibbs_mcmc(&spec, 1.0, 16, 0, &mut stream(1, 0)).unwrap();
        assert!(s.config.values().iter().all(|q| *q == 0.0));
    }

    #[test]
    fn wrong_sampler_is_rejected() {
        let pinned =
            PotentialSpec::harmonic(1.0).with_pinning(super::super::Pinning::Quadratic { nu: 1.0 });
        assert!(matches!(
            sample_equilibrium(&pinned, 0.0, 0.0, 1.0, 8, &mut stream(1, 0)),
            Err(Error::Unsupported(_))
        ));
        assert!(
            sample_gibbs_mcmc(&PotentialSpec::harmonic(1.0), 1.0, 8, 1, &mut stream(1, 1)).is_err()
        );
    }
}
