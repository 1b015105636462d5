use crate::error::{Error, Result};
use std::fmt;

/// Nearest-neighbour interaction `V(r)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Interaction {
    /// `V(r) = a r²/2`
    Harmonic { a: f64 },
    /// `V(r) = a r²/2 + b r³/3 + c r⁴/4`
    Fpu { a: f64, b: f64, c: f64 },
    /// `V(r) = Σ_i coefficients[i] rⁱ`
    Polynomial(Vec<f64>),
}

/// On-site potential `W(q)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Pinning {
    None,
    /// `W(q) = ν² q²/2`
    Quadratic {
        nu: f64,
    },
    /// `W(q) = ν² q²/2 + g q⁴/4`
    Quartic {
        nu: f64,
        g: f64,
    },
}

/// The physics of a chain with unit masses.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub interaction: Interaction,
    pub pinning: Pinning,
}

impl PotentialSpec {
    pub fn harmonic(a: f64) -> Self {
        Self {
            interaction: Interaction::Harmonic { a },
            pinning: Pinning::None,
        }
    }

    pub fn fpu(a: f64, b: f64, c: f64) -> Self {
        Self {
            interaction: Interaction::Fpu { a, b, c },
            pinning: Pinning::None,
        }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        Self {
            interaction: Interaction::Polynomial(coefficients),
            pinning: Pinning::None,
        }
    }

    pub fn with_pinning(mut self, pinning: Pinning) -> Self {
        self.pinning = pinning;
        self
    }

    pub fn is_pinned(&self) -> bool {
        !matches!(self.pinning, Pinning::None)
    }

    /// True when both V and W are quadratic (the linear lattice).
    pub fn is_harmonic(&self) -> bool {
        let v = match &self.interaction {
            Interaction::Harmonic { .. } => true,
            Interaction::Fpu { b, c, .. } => *b == 0.0 && *c == 0.0,
            Interaction::Polynomial(cs) => cs
                .iter()
                .enumerate()
                .all(|(i, c)| i == 0 || i == 2 || *c == 0.0),
        };
        let w = !matches!(self.pinning, Pinning::Quartic { g, .. } if g != 0.0);
        v && w
    }

    /// Curvature `V''(0)`.
    pub fn harmonic_coefficient(&self) -> f64 {
        self.d2v(0.0)
    }

    /// `ν` for quadratic or quartic pinning, 0 when unpinned.
    pub fn pinning_frequency(&self) -> f64 {
        match self.pinning {
            Pinning::None => 0.0,
            Pinning::Quadratic { nu } | Pinning::Quartic { nu, .. } => nu,
        }
    }

    /// Checks growth and sign conditions so that `exp(-βV + λr)` is integrable.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match &self.interaction {
            Interaction::Harmonic { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::Config(format!(
                        "harmonic coefficient a must be > 0, got {a}"
                    )));
                }
            }
            Interaction::Fpu { a, b, c } => {
                if !finite(&[*a, *b, *c]) {
                    return Err(Error::Config("non-finite FPU coefficient".into()));
                }
                if *c < 0.0 {
                    return Err(Error::Config(format!(
                        "quartic coefficient c must be >= 0, got {c}"
                    )));
                }
                if *c == 0.0 && (*b != 0.0 || *a <= 0.0) {
                    return Err(Error::Config(
                        "with c = 0 the potential must be harmonic with a > 0 (b = 0)".into(),
                    ));
                }
            }
            Interaction::Polynomial(cs) => {
                if !finite(cs) {
                    return Err(Error::Config("non-finite polynomial coefficient".into()));
                }
                let degree = cs.iter().rposition(|c| *c != 0.0);
                match degree {
                    Some(d) if d >= 2 && d % 2 == 0 && cs[d] > 0.0 => {}
                    _ => {
                        return Err(Error::Config(
                            "polynomial interaction needs even degree >= 2 with positive leading coefficient"
                                .into(),
                        ))
                    }
                }
            }
        }
        match self.pinning {
            Pinning::None => {}
            Pinning::Quadratic { nu } => {
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::Config(format!(
                        "pinning frequency nu must be > 0, got {nu}"
                    )));
                }
            }
            Pinning::Quartic { nu, g } => {
                if !(nu.is_finite()
                    && g.is_finite()
                    && nu >= 0.0
                    && g >= 0.0
                    && (nu > 0.0 || g > 0.0))
                {
                    return Err(Error::Config(format!(
                        "quartic pinning needs nu >= 0, g >= 0, not both zero (nu = {nu}, g = {g})"
                    )));
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn v(&self, r: f64) -> f64 {
        match &self.interaction {
            Interaction::Harmonic { a } => 0.5 * a * r * r,
            Interaction::Fpu { a, b, c } => {
                let r2 = r * r;
                r2 * (0.5 * a + r * (b / 3.0 + 0.25 * c * r))
            }
            Interaction::Polynomial(cs) => cs.iter().rev().fold(0.0, |acc, c| acc * r + c),
        }
    }

    #[inline]
    pub fn dv(&self, r: f64) -> f64 {
        match &self.interaction {
            Interaction::Harmonic { a } => a * r,
            Interaction::Fpu { a, b, c } => r * (a + r * (b + c * r)),
            Interaction::Polynomial(cs) => cs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * r + i as f64 * c),
        }
    }

    #[inline]
    pub fn d2v(&self, r: f64) -> f64 {
        match &self.interaction {
            Interaction::Harmonic { a } => *a,
            Interaction::Fpu { a, b, c } => a + r * (2.0 * b + 3.0 * c * r),
            Interaction::Polynomial(cs) => cs
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * r + (i * (i - 1)) as f64 * c),
        }
    }

    #[inline]
    pub fn w(&self, q: f64) -> f64 {
        match self.pinning {
            Pinning::None => 0.0,
            Pinning::Quadratic { nu } => 0.5 * nu * nu * q * q,
            Pinning::Quartic { nu, g } => {
                let q2 = q * q;
                q2 * (0.5 * nu * nu + 0.25 * g * q2)
            }
        }
    }

    #[inline]
    pub fn dw(&self, q: f64) -> f64 {
        match self.pinning {
            Pinning::None => 0.0,
            Pinning::Quadratic { nu } => nu * nu * q,
            Pinning::Quartic { nu, g } => q * (nu * nu + g * q * q),
        }
    }

    #[inline]
    pub fn d2w(&self, q: f64) -> f64 {
        match self.pinning {
            Pinning::None => 0.0,
            Pinning::Quadratic { nu } => nu * nu,
            Pinning::Quartic { nu, g } => nu * nu + 3.0 * g * q * q,
        }
    }

    /// Lowest internal energy per site compatible with mean stretch `r`.
    ///
    /// Uses `V(r)`, which is the convex envelope for convex interactions. For
    /// non-convex polynomials the true ground state can be lower; the dual
    /// solver then reports non-convergence instead of a domain error.
    pub fn ground_energy(&self, r: f64) -> f64 {
        self.v(r)
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.interaction {
            Interaction::Harmonic { a } => write!(f, "harmonic(a={a})")?,
            Interaction::Fpu { a, b, c } => write!(f, "fpu(a={a},b={b},c={c})")?,
            Interaction::Polynomial(cs) => {
                let s: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "polynomial({})", s.join(";"))?
            }
        }
        match self.pinning {
            Pinning::None => Ok(()),
            Pinning::Quadratic { nu } => write!(f, "+pinned(nu={nu})"),
            Pinning::Quartic { nu, g } => write!(f, "+pinned(nu={nu},g={g})"),
        }
    }
}
