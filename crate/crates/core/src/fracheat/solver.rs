use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::io::Write;

/// `∂_t u = −c (−Δ)^{α/2} u` on the periodic domain `[origin, origin + length)`,
/// sampled at the nodes `origin + i·length/n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FracHeatProblem {
    pub alpha: f64,
    pub c: f64,
    pub origin: f64,
    pub length: f64,
    pub initial: Vec<f64>,
}

/// A solution sampled on the problem grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub origin: f64,
    pub length: f64,
    pub time: f64,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn dy(&self) -> f64 {
        self.length / self.values.len() as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.dy()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dy()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.dy()).sqrt()
    }

    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dy()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# time = {:e}", self.time)?;
        writeln!(w, "y,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{:e},{:e}", self.y(i), v)?;
        }
        Ok(())
    }
}

impl FracHeatProblem {
    pub fn new(alpha: f64, c: f64, origin: f64, length: f64, initial: Vec<f64>) -> Result<Self> {
        let p = Self {
            alpha,
            c,
            origin,
            length,
            initial,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit point mass at the node nearest to `y0`.
    pub fn point_mass(
        alpha: f64,
        c: f64,
        origin: f64,
        length: f64,
        n: usize,
        y0: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("grid size must be positive".into()));
        }
        let dy = length / n as f64;
        let mut initial = vec![0.0; n];
        let i = (((y0 - origin) / dy).round() as i64).rem_euclid(n as i64) as usize;
        initial[i] = 1.0 / dy;
        Self::new(alpha, c, origin, length, initial)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 2], got {}",
                self.alpha
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!(
                "diffusivity must be positive, got {}",
                self.c
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!(
                "domain length must be positive, got {}",
                self.length
            )));
        }
        let n = self.initial.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 2, got {n}"
            )));
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial profile must be finite".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.initial.len()
    }

    pub fn dy(&self) -> f64 {
        self.length / self.n() as f64
    }

    pub fn with_c(&self, c: f64) -> Self {
        Self { c, ..self.clone() }
    }

    /// Signed frequency index of DFT bin `m`; the Nyquist bin counts as `n/2`.
    fn freq(&self, m: usize) -> f64 {
        let n = self.n();
        if m <= n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        }
    }

    /// Fourier multiplier of the semigroup at time `t` for bin `m`.
    pub fn multiplier(&self, m: usize, t: f64) -> f64 {
        let xi = 2.0 * PI * self.freq(m).abs() / self.length;
        (-self.c * xi.powf(self.alpha) * t).exp()
    }

    fn evolve(&self, t: f64, averaged: bool) -> Result<Profile> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("time must be >= 0, got {t}")));
        }
        let n = self.n();
        let mut planner = FftPlanner::<f64>::new();
        let mut buf: Vec<Complex64> = self
            .initial
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        planner.plan_fft_forward(n).process(&mut buf);
        for (m, z) in buf.iter_mut().enumerate() {
            let mut g = self.multiplier(m, t);
            if averaged && m != 0 {
                let x = PI * self.freq(m) / n as f64;
                g *= x.sin() / x;
            }
            *z *= g;
        }
        // The multiplier depends on |m| only, so Hermitian symmetry survives
        // and the imaginary part is rounding noise.
        planner.plan_fft_inverse(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        Ok(Profile {
            origin: self.origin,
            length: self.length,
            time: t,
            values: buf.iter().map(|z| z.re * inv).collect(),
        })
    }

    /// Exact-in-time spectral solution at the grid nodes.
    pub fn solve(&self, t: f64) -> Result<Profile> {
        self.evolve(t, false)
    }

    /// Averages of the spectral solution over the cells `[y_i − dy/2, y_i + dy/2)`.
    pub fn solve_cell_averages(&self, t: f64) -> Result<Profile> {
        self.evolve(t, true)
    }
}
