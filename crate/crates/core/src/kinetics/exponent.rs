use super::jump::Ensemble;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::stats::{excess_kurtosis, linear_fit};
use rand::Rng;

/// Fewest trajectories accepted by the exponent estimators.
pub const MIN_TRAJECTORIES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentMethod {
    /// Slope of `log(−log|φ(θ)|)` against `log θ` at the largest horizon.
    CharFnFit,
    /// Inverse slope of the inter-quartile range against time on a log-log scale.
    QuantileRatio,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentEstimate {
    pub method: ExponentMethod,
    pub alpha: f64,
    /// 95% percentile-bootstrap interval.
    pub ci: (f64, f64),
    /// Excess kurtosis of the positions at the largest horizon.
    pub excess_kurtosis: f64,
    pub n_trajectories: usize,
    /// Regression points `(x, y)` used by the fit.
    pub points: Vec<(f64, f64)>,
}

impl ExponentEstimate {
    /// Key-value report.
    pub fn report(&self) -> String {
        format!(
            "method = {:?}\nalpha = {:.6}\nci_low = {:.6}\nci_high = {:.6}\nexcess_kurtosis = {:.6}\nn_trajectories = {}\n",
            self.method, self.alpha, self.ci.0, self.ci.1, self.excess_kurtosis, self.n_trajectories
        )
    }
}

fn iqr(xs: &mut [f64]) -> f64 {
    let n = xs.len();
    let q = |xs: &mut [f64], p: f64| {
        let i = ((n - 1) as f64 * p).round() as usize;
        *xs.select_nth_unstable_by(i, |a, b| a.total_cmp(b)).1
    };
    let hi = q(xs, 0.75);
    let lo = q(xs, 0.25);
    hi - lo
}

fn quantile_alpha(
    ens: &Ensemble,
    idx: Option<&[usize]>,
    scratch: &mut Vec<f64>,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut pts = Vec::with_capacity(ens.horizons.len());
    for (h, ys) in ens.horizons.iter().zip(&ens.positions) {
        scratch.clear();
        match idx {
            Some(ix) => scratch.extend(ix.iter().map(|&i| ys[i])),
            None => scratch.extend_from_slice(ys),
        }
        let spread = iqr(scratch);
        if !(spread > 0.0) {
            return Err(Error::Estimation(format!("zero spread at horizon {h}")));
        }
        pts.push((h.ln(), spread.ln()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let slope = linear_fit(&x, &y).0;
    Ok((1.0 / slope, pts))
}

/// Window of `−log|φ|` values used by the characteristic-function fit.
const CF_WINDOW: (f64, f64) = (0.5, 3.0);

fn cf_thetas(ys: &[f64]) -> Vec<f64> {
    let mut s = ys.to_vec();
    let spread = iqr(&mut s).max(1e-300);
    (0..64)
        .map(|j| 0.02 / spread * 2f64.powf(j as f64 / 4.0))
        .collect()
}

/// Fits `log(−log|φ|)` on the θ values whose full-sample `−log|φ|` lies in
/// the window; `sums` holds per-sample `(cos θY, sin θY)`.
fn cf_alpha(
    thetas: &[f64],
    cos: &[Vec<f64>],
    sin: &[Vec<f64>],
    idx: Option<&[usize]>,
) -> Option<(f64, Vec<(f64, f64)>)> {
    let mut pts = Vec::new();
    for (j, th) in thetas.iter().enumerate() {
        let (c, s, n) = match idx {
            Some(ix) => (
                ix.iter().map(|&i| cos[j][i]).sum::<f64>(),
                ix.iter().map(|&i| sin[j][i]).sum::<f64>(),
                ix.len(),
            ),
            None => (cos[j].iter().sum(), sin[j].iter().sum(), cos[j].len()),
        };
        let modulus = (c * c + s * s).sqrt() / n as f64;
        let l = -modulus.ln();
        if l > 0.0 {
            pts.push((th.ln(), l.ln()));
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    Some((linear_fit(&x, &y).0, pts))
}

/// Scaling exponent of the positions in `ens` with a bootstrap interval.
///
/// Variance-based estimators are deliberately absent: for `α < 2` the
/// variance is infinite.
pub fn estimate_scaling_exponent(
    ens: &Ensemble,
    method: ExponentMethod,
    n_bootstrap: usize,
    seed: u64,
) -> Result<ExponentEstimate> {
    let n = ens.n_trajectories();
    if n < MIN_TRAJECTORIES {
        return Err(Error::Estimation(format!(
            "{n} trajectories is below the minimum of {MIN_TRAJECTORIES}"
        )));
    }
    if ens.total_jumps == 0 {
        return Err(Error::Estimation(
            "degenerate ensemble: no trajectory ever scattered".into(),
        ));
    }
    let last = ens.positions.last().expect("nonempty ensemble");
    let kurt = excess_kurtosis(last);
    let mut rng = stream(seed, 0);
    let mut idx = vec![0usize; n];
    let mut boot = Vec::with_capacity(n_bootstrap);
    let (alpha, points) = match method {
        ExponentMethod::QuantileRatio => {
            if ens.horizons.len() < 2 {
                return Err(Error::Estimation(
                    "quantile ratio needs at least two horizons".into(),
                ));
            }
            let mut scratch = Vec::with_capacity(n);
            let (alpha, pts) = quantile_alpha(ens, None, &mut scratch)?;
            for _ in 0..n_bootstrap {
                idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
                boot.push(quantile_alpha(ens, Some(&idx), &mut scratch)?.0);
            }
            (alpha, pts)
        }
        ExponentMethod::CharFnFit => {
            let all = cf_thetas(last);
            // Keep only θ inside the window for the full sample.
            let modulus = |th: f64| {
                let (c, s) = last.iter().fold((0.0, 0.0), |(c, s), y| {
                    (c + (th * y).cos(), s + (th * y).sin())
                });
                (c * c + s * s).sqrt() / n as f64
            };
            let thetas: Vec<f64> = all
                .into_iter()
                .filter(|th| {
                    let l = -modulus(*th).ln();
                    l >= CF_WINDOW.0 && l <= CF_WINDOW.1
                })
                .collect();
            let cos: Vec<Vec<f64>> = thetas
                .iter()
                .map(|th| last.iter().map(|y| (th * y).cos()).collect())
                .collect();
            let sin: Vec<Vec<f64>> = thetas
                .iter()
                .map(|th| last.iter().map(|y| (th * y).sin()).collect())
                .collect();
            let (alpha, pts) = cf_alpha(&thetas, &cos, &sin, None).ok_or_else(|| {
                Error::Estimation("too few θ values in the fitting window".into())
            })?;
            for _ in 0..n_bootstrap {
                idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
                if let Some((a, _)) = cf_alpha(&thetas, &cos, &sin, Some(&idx)) {
                    boot.push(a);
                }
            }
            (alpha, pts)
        }
    };
    let ci = if boot.len() >= 10 {
        boot.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| boot[((boot.len() - 1) as f64 * p).round() as usize];
        (q(0.025), q(0.975))
    } else {
        (alpha, alpha)
    };
    Ok(ExponentEstimate {
        method,
        alpha,
        ci,
        excess_kurtosis: kurt,
        n_trajectories: n,
        points,
    })
}
