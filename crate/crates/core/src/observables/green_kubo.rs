use super::correlation::{column_stats, CorrelationSeries};
use crate::error::{Error, Result};
use crate::stats::linear_fit;
use std::io::Write;

/// Relative growth `(I(2τ) − I(τ))/I(τ)` below which the running integral is
/// treated as saturated even when the growth is statistically resolved.
pub const SATURATION_TOLERANCE: f64 = 0.05;

/// Normalization `χ(T)` in `κ = (I + γT²)/(2χ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChiMode {
    /// `χ = T²`.
    #[default]
    TemperatureSquared,
    /// Monte Carlo energy susceptibility stored in the series metadata.
    Susceptibility,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenKuboEstimate {
    pub taus: Vec<f64>,
    /// Running trapezoid integral `I(τ) = ∫_0^τ C(t) dt`.
    pub integral_partial: Vec<f64>,
    pub integral_stderr: Vec<f64>,
    pub kappa: f64,
    pub kappa_stderr: f64,
    pub chi: f64,
    pub chi_mode: ChiMode,
    /// `(τ, 2τ)` pair used for the saturation test.
    pub tau_pair: (f64, f64),
    pub gap: f64,
    pub gap_stderr: f64,
    /// Slope of `I(τ)` over the last half of the lag window, with its error.
    pub tail_slope: (f64, f64),
    pub divergence_flag: bool,
    /// Set when `I(τ_max) < 0`, i.e. `κ` lies below the stochastic floor.
    pub floor_violated: bool,
}

impl GreenKuboEstimate {
    pub fn relative_gap(&self) -> f64 {
        let i = self.integral_at(self.tau_pair.0);
        self.gap / i
    }

    /// `I(τ)` at the grid point nearest to `tau`.
    pub fn integral_at(&self, tau: f64) -> f64 {
        self.integral_partial[self.index_of(tau)]
    }

    fn index_of(&self, tau: f64) -> usize {
        let dt = if self.taus.len() > 1 {
            self.taus[1] - self.taus[0]
        } else {
            1.0
        };
        ((tau / dt).round() as usize).min(self.taus.len() - 1)
    }

    /// `(I(2τ) − I(τ), standard error)` for an arbitrary `τ` on the grid.
    pub fn gap_at(&self, tau: f64, series: &CorrelationSeries) -> (f64, f64) {
        let (lo, hi) = (self.index_of(tau), self.index_of(2.0 * tau));
        gap_stats(series, lo, hi)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kappa = {:e}", self.kappa)?;
        writeln!(w, "# kappa_stderr = {:e}", self.kappa_stderr)?;
        writeln!(w, "# chi = {:e}", self.chi)?;
        writeln!(w, "# chi_mode = {:?}", self.chi_mode)?;
        writeln!(
            w,
            "# tau_pair = {:e},{:e}",
            self.tau_pair.0, self.tau_pair.1
        )?;
        writeln!(w, "# gap = {:e} +- {:e}", self.gap, self.gap_stderr)?;
        writeln!(
            w,
            "# tail_slope = {:e} +- {:e}",
            self.tail_slope.0, self.tail_slope.1
        )?;
        writeln!(w, "# divergence_flag = {}", self.divergence_flag)?;
        writeln!(w, "# floor_violated = {}", self.floor_violated)?;
        writeln!(w, "tau,integral,stderr")?;
        for ((t, i), e) in self
            .taus
            .iter()
            .zip(&self.integral_partial)
            .zip(&self.integral_stderr)
        {
            writeln!(w, "{t:e},{i:e},{e:e}")?;
        }
        Ok(())
    }
}

fn running_integral(lags: &[f64], c: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(c.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..c.len() {
        acc += 0.5 * (lags[i] - lags[i - 1]) * (c[i] + c[i - 1]);
        out.push(acc);
    }
    out
}

fn gap_stats(series: &CorrelationSeries, lo: usize, hi: usize) -> (f64, f64) {
    let integral = running_integral(&series.lags, &series.values);
    let gap = integral[hi] - integral[lo];
    if series.blocks.len() > 1 {
        let gaps: Vec<Vec<f64>> = series
            .blocks
            .iter()
            .map(|b| {
                let i = running_integral(&series.lags, b);
                vec![i[hi] - i[lo]]
            })
            .collect();
        let (_, se) = column_stats(&gaps, 1);
        (gap, se[0])
    } else {
        // Without blocks, treat lag errors as fully correlated (conservative).
        let dt = series.lags.get(1).copied().unwrap_or(1.0) - series.lags[0];
        (gap, dt * series.std_errors[lo..=hi].iter().sum::<f64>())
    }
}

/// Green-Kubo conductivity `κ = (I(τ_max) + γT²)/(2χ)` from a correlation series.
///
/// The divergence flag is raised when, for the largest pair `(τ, 2τ)` on the
/// grid, `I(2τ) − I(τ)` exceeds three standard errors and also exceeds
/// [`SATURATION_TOLERANCE`] relative to `I(τ)`.
pub fn green_kubo(
    series: &CorrelationSeries,
    gamma: f64,
    temperature: f64,
    chi_mode: ChiMode,
) -> Result<GreenKuboEstimate> {
    let n = series.values.len();
    if n == 0 {
        return Err(Error::Config("empty correlation series".into()));
    }
    let chi = match chi_mode {
        ChiMode::TemperatureSquared => temperature * temperature,
        ChiMode::Susceptibility => {
            series
                .meta
                .susceptibility
                .ok_or_else(|| Error::Config("series carries no susceptibility estimate".into()))?
                .0
        }
    };
    if !(chi > 0.0) {
        return Err(Error::Config(format!("chi must be positive, got {chi}")));
    }
    let integral = running_integral(&series.lags, &series.values);
    let integral_stderr = if series.blocks.len() > 1 {
        let per_block: Vec<Vec<f64>> = series
            .blocks
            .iter()
            .map(|b| running_integral(&series.lags, b))
            .collect();
        column_stats(&per_block, n).1
    } else {
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for i in 1..n {
            acc += 0.5
                * (series.lags[i] - series.lags[i - 1])
                * (series.std_errors[i] + series.std_errors[i - 1]);
            out.push(acc);
        }
        out
    };

    let hi = n - 1;
    let lo = hi / 2;
    let (gap, gap_stderr) = gap_stats(series, lo, hi);
    let base = integral[lo];
    let divergence_flag = gap > 3.0 * gap_stderr && gap > SATURATION_TOLERANCE * base.abs();

    let tail_slope = if n >= 4 {
        let xs = &series.lags[lo..];
        let slope_of = |ys: &[f64]| linear_fit(xs, &ys[lo..]).0;
        let s = slope_of(&integral);
        let se = if series.blocks.len() > 1 {
            let slopes: Vec<Vec<f64>> = series
                .blocks
                .iter()
                .map(|b| vec![slope_of(&running_integral(&series.lags, b))])
                .collect();
            column_stats(&slopes, 1).1[0]
        } else {
            linear_fit(xs, &integral[lo..]).2
        };
        (s, se)
    } else {
        (0.0, 0.0)
    };

    let i_max = integral[hi];
    Ok(GreenKuboEstimate {
        taus: series.lags.clone(),
        kappa: (i_max + gamma * temperature * temperature) / (2.0 * chi),
        kappa_stderr: integral_stderr[hi] / (2.0 * chi),
        integral_partial: integral,
        integral_stderr,
        chi,
        chi_mode,
        tau_pair: (series.lags[lo], series.lags[hi]),
        gap,
        gap_stderr,
        tail_slope,
        divergence_flag,
        floor_violated: i_max < 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::correlation::CorrelationMeta;

    fn meta() -> CorrelationMeta {
        CorrelationMeta {
            temperature: 1.0,
            gamma: 1.0,
            dt: 0.1,
            spec: "harmonic(a=1)".into(),
            n_sites: 8,
            n_trajectories: 1,
            total_samples: 1,
            susceptibility: Some((2.0, 0.0)),
            warning: None,
        }
    }

    #[test]
    fn zero_series_gives_the_stochastic_floor() {
        let lags: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let s = CorrelationSeries::from_values(lags, vec![0.0; 11], vec![0.0; 11], meta()).unwrap();
        let g = green_kubo(&s, 1.0, 1.0, ChiMode::TemperatureSquared).unwrap();
        assert_eq!(g.kappa, 0.5);
        assert!(!g.divergence_flag);
        let g = green_kubo(&s, 1.0, 1.0, ChiMode::Susceptibility).unwrap();
        assert_eq!(g.kappa, 0.25);
    }

    #[test]
    fn exponential_correlation_integrates() {
        let lags: Vec<f64> = (0..4001).map(|i| i as f64 * 0.01).collect();
        let c: Vec<f64> = lags.iter().map(|t| (-t).exp()).collect();
        let s = CorrelationSeries::from_values(lags, c, vec![1e-6; 4001], meta()).unwrap();
        let g = green_kubo(&s, 0.0, 1.0, ChiMode::TemperatureSquared).unwrap();
        assert!((g.integral_partial[4000] - 1.0).abs() < 1e-4);
        assert!(!g.divergence_flag);
        assert!(!g.floor_violated);
    }

    #[test]
    fn growing_integral_is_flagged() {
        let lags: Vec<f64> = (0..1001).map(|i| i as f64 * 0.1).collect();
        let c: Vec<f64> = lags.iter().map(|t| 1.0 / (1.0 + t).sqrt()).collect();
        let s = CorrelationSeries::from_values(lags, c, vec![1e-6; 1001], meta()).unwrap();
        let g = green_kubo(&s, 1.0, 1.0, ChiMode::TemperatureSquared).unwrap();
        assert!(g.divergence_flag);
        assert!(g.tail_slope.0 > 0.0);
    }
}
