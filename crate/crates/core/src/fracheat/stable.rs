use crate::quadrature::integrate;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::f64::consts::{FRAC_PI_2, PI};

/// One symmetric α-stable variate with characteristic function
/// `exp(−scale·|θ|^α)` (Chambers–Mallows–Stuck).
pub fn stable_variate<R: Rng + ?Sized>(alpha: f64, scale: f64, rng: &mut R) -> f64 {
    let u = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp1.sample(rng);
    let sigma = scale.powf(1.0 / alpha);
    let x = if (alpha - 1.0).abs() < 1e-12 {
        u.tan()
    } else {
        (alpha * u).sin() / u.cos().powf(1.0 / alpha)
            * (((1.0 - alpha) * u).cos() / w).powf((1.0 - alpha) / alpha)
    };
    sigma * x
}

/// `n` i.i.d. symmetric α-stable variates; see [`stable_variate`].
///
/// # Panics
/// If `alpha ∉ (0, 2]` or `scale ≤ 0`.
pub fn sample_stable<R: Rng + ?Sized>(alpha: f64, scale: f64, n: usize, rng: &mut R) -> Vec<f64> {
    assert!(alpha > 0.0 && alpha <= 2.0, "alpha must lie in (0, 2]");
    assert!(scale > 0.0, "scale must be positive");
    (0..n).map(|_| stable_variate(alpha, scale, rng)).collect()
}

fn theta_max(alpha: f64, scale: f64) -> f64 {
    (40.0 / scale).powf(1.0 / alpha)
}

/// Distribution function by Gil-Pelaez inversion of the characteristic function.
pub fn stable_cdf(alpha: f64, scale: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let f = |th: f64| {
        if th == 0.0 {
            x
        } else {
            (-scale * th.powf(alpha)).exp() * (th * x).sin() / th
        }
    };
    let tm = theta_max(alpha, scale);
    (0.5 + integrate(f, 0.0, tm, 1e-12, 1e-13) / PI).clamp(0.0, 1.0)
}

/// Density by Fourier inversion of the characteristic function.
pub fn stable_density(alpha: f64, scale: f64, x: f64) -> f64 {
    let f = |th: f64| (-scale * th.powf(alpha)).exp() * (th * x).cos();
    integrate(f, 0.0, theta_max(alpha, scale), 1e-12, 1e-14) / PI
}

/// Tail constant `A` in `P(|X| > x) ~ A x^{−α}` for `α < 2`.
pub fn stable_tail_constant(alpha: f64, scale: f64) -> f64 {
    debug_assert!(alpha < 2.0);
    2.0 * scale * gamma(alpha) * (alpha * FRAC_PI_2).sin() / PI
}

/// Lanczos approximation of Γ(s) for `s > 0`.
fn gamma(s: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if s < 0.5 {
        return PI / ((PI * s).sin() * gamma(1.0 - s));
    }
    let s = s - 1.0;
    let mut a = C[0];
    let t = s + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (s + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(s + 0.5) * (-t).exp() * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn cdf_matches_closed_forms() {
        // Cauchy with scale 1 and Gaussian with variance 2.
        for x in [-3.0, -0.4, 0.3, 2.0, 7.0] {
            let cauchy = 0.5 + f64::atan(x) / PI;
            assert!((stable_cdf(1.0, 1.0, x) - cauchy).abs() < 1e-9, "x = {x}");
            let d = stable_density(1.0, 1.0, x);
            assert!((d - 1.0 / (PI * (1.0 + x * x))).abs() < 1e-9);
        }
        let d = stable_density(2.0, 1.0, 0.5);
        assert!((d - (-0.0625f64).exp() / (4.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gaussian_member_variance() {
        let mut rng = stream(3, 0);
        let xs = sample_stable(2.0, 0.8, 200_000, &mut rng);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        // sd of the variance estimate for a normal sample is var·√(2/n)
        assert!((var - 1.6).abs() < 3.0 * 1.6 * (2.0 / xs.len() as f64).sqrt());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(5.0) - 24.0).abs() < 1e-10);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-12);
    }
}
