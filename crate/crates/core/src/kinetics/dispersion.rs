use crate::error::{Error, Result};
use crate::thermo::PotentialSpec;
use std::f64::consts::PI;

/// Phonon dispersion relation on the torus `k ∈ [0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DispersionSpec {
    /// `ω(k) = c |sin(πk)|`
    Unpinned { c: f64 },
    /// `ω(k) = √(ν² + 4c² sin²(πk))`
    Pinned { c: f64, nu: f64 },
}

impl DispersionSpec {
    /// Dispersion of the harmonic chain with `V = a r²/2` and optional
    /// quadratic pinning `ν`.
    pub fn from_potential(spec: &PotentialSpec) -> Result<Self> {
        if !spec.is_harmonic() {
            return Err(Error::Unsupported(
                "dispersion relations are defined for harmonic chains".into(),
            ));
        }
        let a = spec.harmonic_coefficient();
        Ok(if spec.is_pinned() {
            DispersionSpec::Pinned {
                c: a.sqrt(),
                nu: spec.pinning_frequency(),
            }
        } else {
            DispersionSpec::Unpinned { c: 2.0 * a.sqrt() }
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DispersionSpec::Unpinned { c } if c > 0.0 && c.is_finite() => Ok(()),
            DispersionSpec::Pinned { c, nu }
                if c > 0.0 && c.is_finite() && nu >= 0.0 && nu.is_finite() =>
            {
                Ok(())
            }
            _ => Err(Error::Config(format!(
                "invalid dispersion {self:?}: need c > 0, nu >= 0"
            ))),
        }
    }

    pub fn is_pinned(&self) -> bool {
        matches!(self, DispersionSpec::Pinned { .. })
    }

    #[inline]
    pub fn omega(&self, k: f64) -> f64 {
        let s = (PI * k).sin();
        match *self {
            DispersionSpec::Unpinned { c } => c * s.abs(),
            DispersionSpec::Pinned { c, nu } => (nu * nu + 4.0 * c * c * s * s).sqrt(),
        }
    }

    /// `dω/dk`, taking `k` modulo 1 with the one-sided limit `k → 0+` at 0.
    #[inline]
    pub fn slope(&self, k: f64) -> f64 {
        let k = k.rem_euclid(1.0);
        let (s, co) = (PI * k).sin_cos();
        match *self {
            DispersionSpec::Unpinned { c } => PI * c * co,
            DispersionSpec::Pinned { c, nu } => {
                let w = (nu * nu + 4.0 * c * c * s * s).sqrt();
                if w == 0.0 {
                    2.0 * PI * c * co
                } else {
                    4.0 * PI * c * c * s * co / w
                }
            }
        }
    }

    /// Transport velocity `ω'(k)/(2π)`, used for both the transport equation
    /// and the jump-process position.
    #[inline]
    pub fn velocity(&self, k: f64) -> f64 {
        self.slope(k) / (2.0 * PI)
    }

    pub fn max_speed(&self) -> f64 {
        match *self {
            DispersionSpec::Unpinned { c } => 0.5 * c,
            DispersionSpec::Pinned { .. } => {
                (0..=4096)
                    .map(|i| self.velocity(i as f64 / 8192.0).abs())
                    .fold(0.0, f64::max)
                    * 1.0001
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_match_finite_differences() {
        for d in [
            DispersionSpec::Unpinned { c: 2.0 },
            DispersionSpec::Pinned { c: 1.0, nu: 0.7 },
        ] {
            for &k in &[0.1, 0.3, 0.45, 0.8] {
                let h = 1e-6;
                let fd = (d.omega(k + h) - d.omega(k - h)) / (2.0 * h);
                assert!((d.slope(k) - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_mode_behaviour() {
        let u = DispersionSpec::Unpinned { c: 2.0 };
        assert!((u.slope(1e-9) - 2.0 * PI).abs() < 1e-6);
        assert!((u.slope(1.0 - 1e-9) + 2.0 * PI).abs() < 1e-6);
        let p = DispersionSpec::Pinned { c: 1.0, nu: 1.0 };
        assert!(p.slope(1e-4).abs() < 1e-2);
        assert!((p.omega(0.0) - 1.0).abs() < 1e-15);
    }
}
