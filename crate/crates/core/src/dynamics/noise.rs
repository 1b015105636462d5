use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;

/// Reusable buffer holding the sweep order of one noise sweep.
#[derive(Clone, Debug)]
pub struct NoiseStepPlan {
    pub order: Vec<usize>,
    pub angle_scale: f64,
}

impl NoiseStepPlan {
    pub fn new(n_sites: usize, gamma: f64, dt: f64) -> Self {
        Self {
            order: (0..n_sites).collect(),
            angle_scale: (gamma * dt).sqrt(),
        }
    }

    /// One sweep: every triple `(p_{z-1}, p_z, p_{z+1})` is rotated about
    /// `(1,1,1)` by an independent `N(0, γ dt)` angle, in a fresh random order.
    pub fn apply<R: Rng + ?Sized>(&mut self, momenta: &mut [f64], rng: &mut R) {
        if self.angle_scale == 0.0 {
            return;
        }
        self.order.shuffle(rng);
        let n = momenta.len();
        for &site in &self.order {
            let z: f64 = StandardNormal.sample(rng);
            let theta = self.angle_scale * z;
            let left = if site == 0 { n - 1 } else { site - 1 };
            let right = if site + 1 == n { 0 } else { site + 1 };
            rotate_triple(momenta, left, site, right, theta);
        }
    }
}

/// Rotation about the unit axis `(1,1,1)/√3`: keeps the mean of the triple
/// and turns the deviation vector, so sum and sum of squares are unchanged.
#[inline]
pub fn rotate_triple(p: &mut [f64], i: usize, j: usize, k: usize, theta: f64) {
    let (a, b, c) = (p[i], p[j], p[k]);
    let m = (a + b + c) * (1.0 / 3.0);
    let (da, db, dc) = (a - m, b - m, c - m);
    let (s, co) = sin_cos(theta);
    let s = s * INV_SQRT3;
    p[i] = m + da * co + (dc - db) * s;
    p[j] = m + db * co + (da - dc) * s;
    p[k] = m + dc * co + (db - da) * s;
}

/// `sin_cos` with a Taylor expansion for the small angles that dominate
/// noise sweeps; truncation error is below 1e-22 for `|θ| ≤ 1/2`.
#[inline]
fn sin_cos(theta: f64) -> (f64, f64) {
    if theta.abs() > 0.5 {
        return theta.sin_cos();
    }
    let t2 = theta * theta;
    let mut s = 1.0 / 355_687_428_096_000.0;
    let mut c = 1.0 / 6_402_373_705_728_000.0;
    for (sn, cn) in [
        (-1.0 / 1_307_674_368_000.0, -1.0 / 20_922_789_888_000.0),
        (1.0 / 6_227_020_800.0, 1.0 / 87_178_291_200.0),
        (-1.0 / 39_916_800.0, -1.0 / 479_001_600.0),
        (1.0 / 362_880.0, 1.0 / 3_628_800.0),
        (-1.0 / 5040.0, -1.0 / 40_320.0),
        (1.0 / 120.0, 1.0 / 720.0),
        (-1.0 / 6.0, -1.0 / 24.0),
        (1.0, 0.5),
    ] {
        s = s * t2 + sn;
        c = c * t2 + cn;
    }
    (theta * s, 1.0 - t2 * c)
}

/// One noise sweep of strength `γ` over time `dt` (positions untouched).
pub fn noise_step<R: Rng + ?Sized>(momenta: &mut [f64], gamma: f64, dt: f64, rng: &mut R) {
    NoiseStepPlan::new(momenta.len(), gamma, dt).apply(momenta, rng);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn rotation_preserves_sum_and_norm() {
        let mut p = [1.5, -0.25, 3.0];
        let (s0, q0): (f64, f64) = (p.iter().sum(), p.iter().map(|x| x * x).sum());
        rotate_triple(&mut p, 0, 1, 2, 0.7);
        let (s1, q1): (f64, f64) = (p.iter().sum(), p.iter().map(|x| x * x).sum());
        assert!((s0 - s1).abs() < 1e-14 && (q0 - q1).abs() < 1e-13);
    }

    #[test]
    fn full_turn_is_identity() {
        let mut p = [0.3, 0.9, -1.2];
        rotate_triple(&mut p, 0, 1, 2, 2.0 * std::f64::consts::PI);
        assert!((p[0] - 0.3).abs() < 1e-14 && (p[1] - 0.9).abs() < 1e-14);
    }

    #[test]
    fn series_sin_cos_matches_libm() {
        for i in -100..=100 {
            let t = i as f64 * 0.006;
            let (s, c) = sin_cos(t);
            assert!(
                (s - t.sin()).abs() < 2e-16 && (c - t.cos()).abs() < 2e-16,
                "theta = {t}"
            );
        }
    }

    #[test]
    fn zero_gamma_is_identity() {
        let mut p = vec![1.0, 2.0, 3.0, 4.0];
        noise_step(&mut p, 0.0, 0.1, &mut stream(0, 0));
        assert_eq!(p, vec![1.0, 2.0, 3.0, 4.0]);
    }
}
