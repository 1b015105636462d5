use crate::error::{Error, Result};
use crate::quadrature::integrate;
use std::f64::consts::PI;

#[inline]
fn s2(k: f64) -> f64 {
    let s = (PI * k).sin();
    s * s
}

/// Collision kernel `C(k, k')` of the linear transport equation.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec {
    /// `C = c_K sin²(πk) sin²(πk')`
    Product {
        strength: f64,
    },
    /// `C ≡ value`; violates the small-`k` behaviour but has constant rates.
    Constant {
        value: f64,
    },
    Tabulated(TabulatedKernel),
}

/// Kernel of the form `C(k, k') = sin²(πk) sin²(πk') H(k, k')` with the
/// reduced kernel `H` tabulated at cell centres `(i + ½)/n` and interpolated
/// bilinearly with periodic wrap-around.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedKernel {
    n: usize,
    reduced: Vec<f64>,
    /// `∫ sin²(πk') H(k_i, k') dk'` per row.
    row_rates: Vec<f64>,
}

impl TabulatedKernel {
    /// Tabulates `h(k, k')`, which must be symmetric and nonnegative.
    pub fn from_reduced<F: Fn(f64, f64) -> f64>(n: usize, h: F) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!(
                "tabulated kernel needs n >= 4, got {n}"
            )));
        }
        let center = |i: usize| (i as f64 + 0.5) / n as f64;
        let mut reduced = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                reduced[i * n + j] = h(center(i), center(j));
            }
        }
        Self::from_values(n, reduced)
    }

    /// Uses precomputed reduced values, row-major.
    pub fn from_values(n: usize, reduced: Vec<f64>) -> Result<Self> {
        if reduced.len() != n * n {
            return Err(Error::Config(
                "reduced kernel table has the wrong size".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (reduced[i * n + j], reduced[j * n + i]);
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::Config(format!(
                        "kernel value at ({i}, {j}) is negative or non-finite"
                    )));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1e-300) {
                    return Err(Error::Config(format!(
                        "kernel is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let mut t = Self {
            n,
            reduced,
            row_rates: Vec::new(),
        };
        t.row_rates = (0..n)
            .map(|i| {
                let mut acc = 0.0;
                // The interpolated row is smooth between consecutive centres.
                for j in 0..=n {
                    let a = (j as f64 - 0.5).max(0.0) / n as f64;
                    let b = ((j as f64 + 0.5) / n as f64).min(1.0);
                    if b > a {
                        acc += integrate(|k| s2(k) * t.row_value(i, k), a, b, 1e-13, 1e-16);
                    }
                }
                acc
            })
            .collect();
        Ok(t)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Exact collision kernel of the momentum-exchange noise acting on a
    /// harmonic chain, in reduced form
    /// `H = (32/3)[cos²πk + cos²πk' − 2 cos²πk cos²πk']`.
    pub fn momentum_exchange(n: usize) -> Result<Self> {
        Self::from_reduced(n, |k, kp| {
            let (a, b) = ((PI * k).cos().powi(2), (PI * kp).cos().powi(2));
            32.0 / 3.0 * (a + b - 2.0 * a * b)
        })
    }

    /// Source-side interpolation: `(i0, i1, w)` with `k = w·k_{i0} + (1−w)·k_{i1}`.
    #[inline]
    pub(crate) fn bracket(&self, k: f64) -> (usize, usize, f64) {
        let x = k.rem_euclid(1.0) * self.n as f64 - 0.5;
        let f = x.floor();
        let t = x - f;
        let i0 = (f as isize).rem_euclid(self.n as isize) as usize;
        let i1 = (i0 + 1) % self.n;
        (i0, i1, 1.0 - t)
    }

    /// Row `i` of `H`, interpolated in the second argument.
    #[inline]
    pub(crate) fn row_value(&self, i: usize, kp: f64) -> f64 {
        let (j0, j1, w) = self.bracket(kp);
        let row = &self.reduced[i * self.n..(i + 1) * self.n];
        w * row[j0] + (1.0 - w) * row[j1]
    }

    #[inline]
    pub fn reduced(&self, k: f64, kp: f64) -> f64 {
        let (i0, i1, w) = self.bracket(k);
        w * self.row_value(i0, kp) + (1.0 - w) * self.row_value(i1, kp)
    }

    pub(crate) fn row_rate(&self, i: usize) -> f64 {
        self.row_rates[i]
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Product { strength } if *strength > 0.0 && strength.is_finite() => Ok(()),
            KernelSpec::Constant { value } if *value >= 0.0 && value.is_finite() => Ok(()),
            KernelSpec::Tabulated(_) => Ok(()),
            _ => Err(Error::Config(format!("invalid kernel {self:?}"))),
        }
    }

    #[inline]
    pub fn eval(&self, k: f64, kp: f64) -> f64 {
        match self {
            KernelSpec::Product { strength } => strength * s2(k) * s2(kp),
            KernelSpec::Constant { value } => *value,
            KernelSpec::Tabulated(t) => s2(k) * s2(kp) * t.reduced(k, kp),
        }
    }

    /// `λ(k) = γ ∫_0^1 C(k, k') dk'`.
    #[inline]
    pub fn total_rate(&self, gamma: f64, k: f64) -> f64 {
        gamma
            * match self {
                KernelSpec::Product { strength } => 0.5 * strength * s2(k),
                KernelSpec::Constant { value } => *value,
                KernelSpec::Tabulated(t) => {
                    let (i0, i1, w) = t.bracket(k);
                    s2(k) * (w * t.row_rate(i0) + (1.0 - w) * t.row_rate(i1))
                }
            }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rate_closed_form() {
        let k = KernelSpec::Product { strength: 1.0 };
        assert_eq!(k.total_rate(1.0, 0.0), 0.0);
        assert!((k.total_rate(1.0, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn momentum_exchange_rate_matches_closed_form() {
        let t = TabulatedKernel::momentum_exchange(256).unwrap();
        let k = KernelSpec::Tabulated(t);
        for &x in &[0.1, 0.27, 0.5, 0.9] {
            let psi = 4.0 / 3.0 * s2(x) * (1.0 + 2.0 * (PI * x).cos().powi(2));
            // Bilinear interpolation of a smooth table: O(1/n²).
            assert!(
                (k.total_rate(1.0, x) - psi).abs() < 2e-4 * psi.max(1.0),
                "k = {x}"
            );
        }
    }

    #[test]
    fn asymmetric_tables_are_rejected() {
        let mut v = vec![1.0; 16];
        v[1] = 2.0;
        assert!(TabulatedKernel::from_values(4, v).is_err());
    }
}
