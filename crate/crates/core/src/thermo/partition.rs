use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::quadrature::integrate_vec;

/// `ln(1e16)`: the integrand is dropped where it falls below `1e-16` of its peak.
const LOG_CUTOFF: f64 = 36.841_361_487_904_734;
const SCAN_POINTS: usize = 2001;
const QUAD_TOL: f64 = 1e-13;

/// Truncated support of `exp(-βV(r) + λr)`, in log space.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Support {
    pub lo: f64,
    pub hi: f64,
    pub log_peak: f64,
}

#[inline]
fn log_weight(spec: &PotentialSpec, lambda: f64, beta: f64, r: f64) -> f64 {
    -beta * spec.v(r) + lambda * r
}

pub(crate) fn support(spec: &PotentialSpec, lambda: f64, beta: f64) -> Result<Support> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!(
            "beta must be positive and finite, got {beta}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::Domain(format!(
            "lambda must be finite, got {lambda}"
        )));
    }
    spec.validate()?;
    let g = |r: f64| log_weight(spec, lambda, beta, r);

    // Grow a symmetric window around the origin until both ends sit well below
    // the best value seen and the weight decreases outwards.
    let mut half = 1.0f64;
    let (mut best_r, mut best_g) = (0.0, g(0.0));
    loop {
        let n = 64;
        for i in 0..=n {
            let r = -half + 2.0 * half * i as f64 / n as f64;
            let v = g(r);
            if v > best_g {
                best_g = v;
                best_r = r;
            }
        }
        let h = half * 1e-3;
        let ok_lo = g(-half) < best_g - LOG_CUTOFF - 5.0 && g(-half) < g(-half + h);
        let ok_hi = g(half) < best_g - LOG_CUTOFF - 5.0 && g(half) < g(half - h);
        if ok_lo && ok_hi && best_r.abs() < 0.9 * half {
            break;
        }
        half *= 2.0;
        if half > 1e12 {
            return Err(Error::Config(format!(
                "exp(-beta V + lambda r) is not integrable for {spec} (lambda = {lambda}, beta = {beta})"
            )));
        }
    }

    let step = 2.0 * half / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| g(-half + step * i as f64))
        .collect();
    let imax = grid
        .iter()
        .enumerate()
        .fold(0, |m, (i, v)| if *v > grid[m] { i } else { m });

    // Golden-section refinement of the peak inside the neighbouring cells.
    let (mut a, mut b) = (
        -half + step * imax.saturating_sub(1) as f64,
        -half + step * (imax + 1).min(SCAN_POINTS - 1) as f64,
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    let log_peak = g(0.5 * (a + b)).max(grid[imax]);

    let threshold = log_peak - LOG_CUTOFF;
    let first = grid.iter().position(|v| *v >= threshold).unwrap_or(imax);
    let last = grid.iter().rposition(|v| *v >= threshold).unwrap_or(imax);
    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if g(mid) >= threshold {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        outside
    };
    let r_first = -half + step * first as f64;
    let r_last = -half + step * last as f64;
    let lo = if first == 0 {
        -half
    } else {
        bisect(r_first, r_first - step)
    };
    let hi = if last == SCAN_POINTS - 1 {
        half
    } else {
        bisect(r_last, r_last + step)
    };
    Ok(Support { lo, hi, log_peak })
}

/// `log ∫ exp(-βV(r) + λr) dr`.
///
/// The integral is evaluated relative to the peak of the integrand, so large
/// `λ` or `β` do not overflow.
pub fn log_partition(spec: &PotentialSpec, lambda: f64, beta: f64) -> Result<f64> {
    let s = support(spec, lambda, beta)?;
    let [z] = integrate_vec(
        |r| [(log_weight(spec, lambda, beta, r) - s.log_peak).exp()],
        s.lo,
        s.hi,
        QUAD_TOL,
        0.0,
    );
    Ok(s.log_peak + z.ln())
}

/// Single-site moments of the stretch marginal `∝ exp(-βV(r) + λr)`.
#[derive(Clone, Copy, Debug)]
pub struct SiteMoments {
    pub log_z: f64,
    pub mean_r: f64,
    pub mean_v: f64,
    pub var_r: f64,
    pub cov_rv: f64,
    pub var_v: f64,
    /// `⟨V'(r)⟩`, which equals `λ/β` by integration by parts.
    pub mean_dv: f64,
}

pub fn site_moments(spec: &PotentialSpec, lambda: f64, beta: f64) -> Result<SiteMoments> {
    let s = support(spec, lambda, beta)?;
    let w = |r: f64| (log_weight(spec, lambda, beta, r) - s.log_peak).exp();
    let [z, sr, sv, sdv] = integrate_vec(
        |r| {
            let e = w(r);
            [e, e * r, e * spec.v(r), e * spec.dv(r)]
        },
        s.lo,
        s.hi,
        QUAD_TOL,
        0.0,
    );
    let (mr, mv) = (sr / z, sv / z);
    // Central second moments in a second pass to avoid cancellation.
    let [crr, crv, cvv] = integrate_vec(
        |r| {
            let e = w(r);
            let (dr, dv) = (r - mr, spec.v(r) - mv);
            [e * dr * dr, e * dr * dv, e * dv * dv]
        },
        s.lo,
        s.hi,
        QUAD_TOL,
        0.0,
    );
    Ok(SiteMoments {
        log_z: s.log_peak + z.ln(),
        mean_r: mr,
        mean_v: mv,
        var_r: crr / z,
        cov_rv: crv / z,
        var_v: cvv / z,
        mean_dv: sdv / z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_closed_forms() {
        let h = PotentialSpec::harmonic(1.0);
        assert_relative_eq!(
            log_partition(&h, 0.0, 1.0).unwrap(),
            0.5 * (2.0 * PI).ln(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            log_partition(&h, 1.0, 1.0).unwrap(),
            0.5 * (2.0 * PI).ln() + 0.5,
            epsilon = 1e-12
        );
        // Far from the origin and sharply peaked.
        let (l, b) = (300.0, 50.0);
        let exact = 0.5 * (2.0 * PI / b).ln() + l * l / (2.0 * b);
        assert_relative_eq!(
            log_partition(&h, l, b).unwrap(),
            exact,
            max_relative = 1e-13
        );
    }

    #[test]
    fn gaussian_moments() {
        let a = 2.0;
        let h = PotentialSpec::harmonic(a);
        let m = site_moments(&h, 0.6, 1.5).unwrap();
        let mean = 0.6 / (1.5 * a);
        let var = 1.0 / (1.5 * a);
        assert_relative_eq!(m.mean_r, mean, epsilon = 1e-12);
        assert_relative_eq!(m.var_r, var, epsilon = 1e-12);
        assert_relative_eq!(m.mean_dv, 0.6 / 1.5, epsilon = 1e-12);
        assert_relative_eq!(m.mean_v, 0.5 * a * (var + mean * mean), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = PotentialSpec::harmonic(1.0);
        assert!(log_partition(&h, 0.0, 0.0).is_err());
        assert!(log_partition(&h, 0.0, -1.0).is_err());
        assert!(log_partition(&PotentialSpec::fpu(1.0, 0.0, -1.0), 0.0, 1.0).is_err());
    }
}
