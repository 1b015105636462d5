use super::solver::{FracHeatProblem, Profile};
use crate::error::{Error, Result};
use crate::kinetics::TransportField;
use crate::stats::linear_fit;
use std::fmt::Write as _;

/// A k-integrated kinetic density in macroscopic coordinates, `ū_ε(t, y)`,
/// with the per-node estimator variance when it comes from Monte Carlo.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticProfile {
    pub epsilon: f64,
    /// Macroscopic time `t`; the kinetic horizon is `ε^{−α} t`.
    pub time: f64,
    pub origin: f64,
    pub length: f64,
    pub values: Vec<f64>,
    pub variance: Option<Vec<f64>>,
}

impl KineticProfile {
    /// Histogram of the rescaled positions `ε·Y`, wrapped onto the periodic
    /// domain, with bins centred on the nodes `origin + i·length/n`.
    pub fn from_positions(
        epsilon: f64,
        time: f64,
        origin: f64,
        length: f64,
        n: usize,
        positions: &[f64],
    ) -> Result<Self> {
        if positions.is_empty() || n < 2 || !(length > 0.0) || !(epsilon > 0.0) {
            return Err(Error::Config(
                "empty ensemble or invalid histogram grid".into(),
            ));
        }
        let dy = length / n as f64;
        let mut counts = vec![0u64; n];
        for y in positions {
            let u = ((epsilon * y - origin) / dy + 0.5).rem_euclid(n as f64);
            counts[(u as usize).min(n - 1)] += 1;
        }
        let m = positions.len() as f64;
        let values: Vec<f64> = counts.iter().map(|&c| c as f64 / (m * dy)).collect();
        let variance = values
            .iter()
            .map(|h| h * (1.0 - h * dy).max(0.0) / (m * dy))
            .collect();
        Ok(Self {
            epsilon,
            time,
            origin,
            length,
            values,
            variance: Some(variance),
        })
    }

    /// `∫ W dk` of a transport solution at the kinetic horizon, mapped to
    /// macroscopic coordinates `y = ε·y_kinetic`.
    pub fn from_transport(epsilon: f64, time: f64, field: &TransportField) -> Self {
        Self {
            epsilon,
            time,
            origin: epsilon * (field.origin + 0.5 * field.dy()),
            length: epsilon * field.length,
            values: field.k_integrated().iter().map(|v| v / epsilon).collect(),
            variance: None,
        }
    }

    pub fn from_profile(epsilon: f64, profile: &Profile) -> Self {
        Self {
            epsilon,
            time: profile.time,
            origin: profile.origin,
            length: profile.length,
            values: profile.values.clone(),
            variance: None,
        }
    }

    fn dy(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    /// Noise-corrected squared L² distance to `u` and its standard error.
    fn distance_sq(&self, u: &[f64]) -> (f64, f64) {
        let dy = self.dy();
        let mut d2 = 0.0;
        let mut var_d2 = 0.0;
        for (i, (h, v)) in self.values.iter().zip(u).enumerate() {
            let e = h - v;
            let s2 = self.variance.as_ref().map_or(0.0, |s| s[i]);
            d2 += (e * e - s2) * dy;
            var_d2 += (4.0 * e * e * s2 + 2.0 * s2 * s2) * dy * dy;
        }
        (d2, var_d2.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FracCheckRow {
    pub epsilon: f64,
    pub l2: f64,
    pub l2_stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FracCheckReport {
    pub alpha: f64,
    pub c: f64,
    pub c_fitted: bool,
    /// L² distance at the fitting scale (the largest ε) after the fit.
    pub fit_residual: f64,
    /// Rows ordered by decreasing ε.
    pub rows: Vec<FracCheckRow>,
    /// Every step down the ladder is non-increasing within three standard errors.
    pub monotone: bool,
    /// Slope of `log L²` against `log ε`, when all distances are positive.
    pub trend_slope: Option<f64>,
}

impl FracCheckReport {
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "c = {:.6}", self.c);
        let _ = writeln!(s, "c_fitted = {}", self.c_fitted);
        let _ = writeln!(s, "fit_residual = {:.6e}", self.fit_residual);
        let _ = writeln!(s, "monotone = {}", self.monotone);
        match self.trend_slope {
            Some(t) => {
                let _ = writeln!(s, "trend_slope = {t:.4}");
            }
            None => {
                let _ = writeln!(s, "trend_slope = none");
            }
        }
        let _ = writeln!(s, "# epsilon,l2,l2_stderr");
        for r in &self.rows {
            let _ = writeln!(s, "{:e},{:.6e},{:.6e}", r.epsilon, r.l2, r.l2_stderr);
        }
        s
    }
}

fn to_distance((d2, se): (f64, f64)) -> (f64, f64) {
    let d = d2.max(0.0).sqrt();
    let se = if d > 0.0 { se / (2.0 * d) } else { se.sqrt() };
    (d, se)
}

/// Compares k-integrated kinetic profiles along an ε-ladder with the
/// fractional heat solution started from `problem.initial`.
///
/// With `fit_c` the diffusivity is fitted once, by minimising the L²
/// distance at the largest ε, and then held fixed for the whole ladder.
pub fn kinetic_to_fractional_check(
    profiles: &[KineticProfile],
    problem: &FracHeatProblem,
    fit_c: bool,
) -> Result<FracCheckReport> {
    problem.validate()?;
    if profiles.is_empty() {
        return Err(Error::Config("no kinetic profiles supplied".into()));
    }
    let tol = 1e-9 * problem.length;
    for p in profiles {
        if p.values.len() != problem.n()
            || (p.length - problem.length).abs() > tol
            || (p.origin - problem.origin).abs() > tol
            || p.variance
                .as_ref()
                .is_some_and(|v| v.len() != p.values.len())
        {
            return Err(Error::Config(format!(
                "profile at epsilon = {} does not match the fractional grid ({} nodes on [{}, {}))",
                p.epsilon,
                problem.n(),
                problem.origin,
                problem.origin + problem.length
            )));
        }
    }
    let mut order: Vec<&KineticProfile> = profiles.iter().collect();
    order.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let coarse = order[0];
    let objective = |c: f64| -> Result<f64> {
        let u = problem.with_c(c).solve_cell_averages(coarse.time)?;
        Ok(coarse.distance_sq(&u.values).0)
    };
    let c = if fit_c {
        // Log-grid scan followed by golden-section refinement.
        let (lo, hi) = ((problem.c / 30.0).ln(), (problem.c * 30.0).ln());
        let m = 61;
        let grid: Vec<f64> = (0..m)
            .map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64)
            .collect();
        let vals = grid
            .iter()
            .map(|x| objective(x.exp()))
            .collect::<Result<Vec<_>>>()?;
        let best = (0..m)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .expect("nonempty scan");
        let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(m - 1)]);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (objective(x1.exp())?, objective(x2.exp())?);
        for _ in 0..80 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = objective(x1.exp())?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = objective(x2.exp())?;
            }
        }
        (0.5 * (a + b)).exp()
    } else {
        problem.c
    };
    let fitted = problem.with_c(c);
    let mut rows = Vec::with_capacity(order.len());
    for p in &order {
        let u = fitted.solve_cell_averages(p.time)?;
        let (l2, l2_stderr) = to_distance(p.distance_sq(&u.values));
        rows.push(FracCheckRow {
            epsilon: p.epsilon,
            l2,
            l2_stderr,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].l2 <= w[0].l2 + 3.0 * w[0].l2_stderr.hypot(w[1].l2_stderr));
    let trend_slope = (rows.len() >= 2 && rows.iter().all(|r| r.l2 > 0.0)).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| r.epsilon.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.l2.ln()).collect();
        linear_fit(&x, &y).0
    });
    Ok(FracCheckReport {
        alpha: problem.alpha,
        c,
        c_fitted: fit_c,
        fit_residual: rows[0].l2,
        rows,
        monotone,
        trend_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_test_recovers_c() {
        let p = FracHeatProblem::point_mass(1.5, 0.8, -20.0, 40.0, 256, 0.0).unwrap();
        let profiles: Vec<KineticProfile> = [0.125, 0.0625]
            .iter()
            .map(|&e| KineticProfile::from_profile(e, &p.solve_cell_averages(1.0).unwrap()))
            .collect();
        let guess = p.with_c(0.3);
        let r = kinetic_to_fractional_check(&profiles, &guess, true).unwrap();
        assert!((r.c - 0.8).abs() < 1e-6, "{}", r.c);
        assert!(r.rows.iter().all(|row| row.l2 < 1e-6));
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let p = FracHeatProblem::point_mass(1.5, 1.0, -20.0, 40.0, 256, 0.0).unwrap();
        let q = FracHeatProblem::point_mass(1.5, 1.0, -20.0, 40.0, 128, 0.0).unwrap();
        let prof = KineticProfile::from_profile(0.1, &q.solve(1.0).unwrap());
        assert!(matches!(
            kinetic_to_fractional_check(&[prof], &p, false),
            Err(Error::Config(_))
        ));
    }
}
