use super::partition::{log_partition, site_moments};
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use std::f64::consts::PI;

const MAX_NEWTON: usize = 200;

/// Thermodynamic state at mean stretch `rbar` and energy per site `ubar`.
///
/// Conventions: `S(r,u) = inf_{λ,β>0} [βu − λr + log Z(λ,β) + ½ log(2π/β)]`,
/// so `∂S/∂u = β`, `∂S/∂r = −λ` and the pressure is `P = λ/β = ⟨V'(r)⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoPoint {
    pub lambda: f64,
    pub beta: f64,
    pub rbar: f64,
    pub ubar: f64,
    pub pressure: f64,
    pub entropy: f64,
    pub log_z: f64,
}

impl ThermoPoint {
    /// Re-evaluates the dual objective at the stored multipliers.
    pub fn dual_value(&self) -> f64 {
        dual(self.lambda, self.beta, self.rbar, self.ubar, self.log_z)
    }
}

#[inline]
fn dual(lambda: f64, beta: f64, r: f64, u: f64, log_z: f64) -> f64 {
    beta * u - lambda * r + log_z + 0.5 * (2.0 * PI / beta).ln()
}

/// Entropy, multipliers and pressure at `(r, u)` for an unpinned chain.
pub fn entropy(spec: &PotentialSpec, r: f64, u: f64) -> Result<ThermoPoint> {
    entropy_from(spec, r, u, None)
}

/// Same as [`entropy`], warm-started from `(λ, β)` when given.
pub fn entropy_from(
    spec: &PotentialSpec,
    r: f64,
    u: f64,
    guess: Option<(f64, f64)>,
) -> Result<ThermoPoint> {
    spec.validate()?;
    if spec.is_pinned() {
        return Err(Error::Unsupported(
            "thermodynamics in (r, u) is defined for unpinned chains only".into(),
        ));
    }
    if !(r.is_finite() && u.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite state (r = {r}, u = {u})"
        )));
    }
    let ground = spec.ground_energy(r);
    if u <= ground {
        return Err(Error::Domain(format!(
            "u = {u} is not above the ground-state energy {ground} at r = {r}"
        )));
    }

    let (mut lambda, mut beta) = guess.unwrap_or_else(|| {
        let b = 1.0 / (u - ground);
        (b * spec.dv(r), b)
    });
    let objective =
        |l: f64, b: f64| -> Result<f64> { Ok(dual(l, b, r, u, log_partition(spec, l, b)?)) };

    let mut m = site_moments(spec, lambda, beta)?;
    let mut f = dual(lambda, beta, r, u, m.log_z);
    let tol_r = 1e-11 * (1.0 + r.abs());
    let tol_u = 1e-11 * (1.0 + u.abs());
    for iter in 0..=MAX_NEWTON {
        let g_l = m.mean_r - r;
        let g_b = u - m.mean_v - 0.5 / beta;
        if g_l.abs() <= tol_r && g_b.abs() <= tol_u {
            return Ok(ThermoPoint {
                lambda,
                beta,
                rbar: r,
                ubar: u,
                pressure: lambda / beta,
                entropy: f,
                log_z: m.log_z,
            });
        }
        if iter == MAX_NEWTON {
            break;
        }
        let h_ll = m.var_r;
        let h_lb = -m.cov_rv;
        let h_bb = m.var_v + 0.5 / (beta * beta);
        let det = h_ll * h_bb - h_lb * h_lb;
        if !(det > 0.0 && det.is_finite()) {
            return Err(Error::numerical(
                "singular Hessian in the entropy dual",
                format!("r = {r}, u = {u}, lambda = {lambda}, beta = {beta}, det = {det}"),
            ));
        }
        let d_l = -(h_bb * g_l - h_lb * g_b) / det;
        let d_b = -(h_ll * g_b - h_lb * g_l) / det;

        // Keep β positive, then backtrack on the (convex) objective.
        let mut t = 1.0f64;
        if d_b < 0.0 {
            t = t.min(0.9 * beta / -d_b);
        }
        let slope = g_l * d_l + g_b * d_b;
        let mut accepted = false;
        for _ in 0..60 {
            let (l1, b1) = (lambda + t * d_l, beta + t * d_b);
            let f1 = objective(l1, b1)?;
            if f1 <= f + 1e-4 * t * slope + 1e-14 * f.abs().max(1.0) {
                lambda = l1;
                beta = b1;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::numerical(
                "line search failed in the entropy dual",
                format!(
                    "r = {r}, u = {u}, lambda = {lambda}, beta = {beta}, grad = ({g_l:e}, {g_b:e})"
                ),
            ));
        }
        m = site_moments(spec, lambda, beta)?;
        f = dual(lambda, beta, r, u, m.log_z);
    }
    Err(Error::numerical(
        format!("entropy dual did not converge in {MAX_NEWTON} Newton iterations"),
        format!("r = {r}, u = {u}, lambda = {lambda}, beta = {beta}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_closed_form() {
        let a = 1.7;
        let spec = PotentialSpec::harmonic(a);
        let (r, u) = (0.4, 1.3);
        let p = entropy(&spec, r, u).unwrap();
        let beta = 1.0 / (u - 0.5 * a * r * r);
        assert_relative_eq!(p.beta, beta, max_relative = 1e-10);
        assert_relative_eq!(p.lambda, beta * a * r, max_relative = 1e-10);
        assert_relative_eq!(p.pressure, a * r, max_relative = 1e-10);
        // S = 1 + ln(2π/β) − ½ ln(βa/(2π)) − ... collapses to ln(2π (u − ar²/2)) + 1 − ½ln(a)
        let s_exact = 1.0 + (2.0 * PI / beta).ln() - 0.5 * a.ln();
        assert_relative_eq!(p.entropy, s_exact, max_relative = 1e-10);
    }

    #[test]
    fn origin_example() {
        let p = entropy(&PotentialSpec::harmonic(1.0), 0.0, 1.0).unwrap();
        assert_relative_eq!(p.beta, 1.0, epsilon = 1e-10);
        assert!(p.lambda.abs() < 1e-10);
        assert!(p.pressure.abs() < 1e-10);
    }

    #[test]
    fn below_ground_state_is_a_domain_error() {
        let spec = PotentialSpec::fpu(1.0, 0.0, 1.0);
        assert!(matches!(entropy(&spec, 1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn derivatives_are_the_multipliers() {
        let spec = PotentialSpec::fpu(1.0, 0.5, 1.0);
        let (r, u, h) = (0.3, 1.2, 1e-4);
        let p = entropy(&spec, r, u).unwrap();
        let s = |r: f64, u: f64| entropy(&spec, r, u).unwrap().entropy;
        let ds_du = (s(r, u + h) - s(r, u - h)) / (2.0 * h);
        let ds_dr = (s(r + h, u) - s(r - h, u)) / (2.0 * h);
        assert_relative_eq!(ds_du, p.beta, max_relative = 1e-6);
        assert_relative_eq!(ds_dr, -p.lambda, epsilon = 1e-6, max_relative = 1e-6);
    }
}
