use super::dispersion::DispersionSpec;
use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use std::io::Write;

/// Phase-space density `W(y, k)` on a periodic `y` grid of cell centres and
/// `k` cells in `[0, 1)`, stored y-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportField {
    pub n_y: usize,
    pub n_k: usize,
    /// Period of the `y` domain, which is `[origin, origin + length)`.
    pub length: f64,
    pub origin: f64,
    pub values: Vec<f64>,
    pub time: f64,
}

impl TransportField {
    pub fn zeros(n_y: usize, n_k: usize, origin: f64, length: f64) -> Result<Self> {
        if n_y < 2 || n_k < 2 || !(length > 0.0) {
            return Err(Error::Config(
                "transport grid needs n_y, n_k >= 2 and length > 0".into(),
            ));
        }
        Ok(Self {
            n_y,
            n_k,
            length,
            origin,
            values: vec![0.0; n_y * n_k],
            time: 0.0,
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(
        n_y: usize,
        n_k: usize,
        origin: f64,
        length: f64,
        f: F,
    ) -> Result<Self> {
        let mut w = Self::zeros(n_y, n_k, origin, length)?;
        for i in 0..n_y {
            for j in 0..n_k {
                w.values[i * n_k + j] = f(w.y(i), w.k(j));
            }
        }
        Ok(w)
    }

    /// Normalized histogram of samples `(y, k)`, with `y` wrapped into the domain.
    pub fn histogram(
        n_y: usize,
        n_k: usize,
        origin: f64,
        length: f64,
        samples: &[(f64, f64)],
    ) -> Result<Self> {
        let mut w = Self::zeros(n_y, n_k, origin, length)?;
        if samples.is_empty() {
            return Ok(w);
        }
        let cell = 1.0 / (samples.len() as f64 * w.dy() * w.dk());
        for &(y, k) in samples {
            let (i, j) = w.locate(y, k);
            w.values[i * n_k + j] += cell;
        }
        Ok(w)
    }

    #[inline]
    pub fn locate(&self, y: f64, k: f64) -> (usize, usize) {
        let u = ((y - self.origin) / self.length).rem_euclid(1.0);
        let i = ((u * self.n_y as f64) as usize).min(self.n_y - 1);
        let j = ((k.rem_euclid(1.0) * self.n_k as f64) as usize).min(self.n_k - 1);
        (i, j)
    }

    pub fn dy(&self) -> f64 {
        self.length / self.n_y as f64
    }

    pub fn dk(&self) -> f64 {
        1.0 / self.n_k as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.dy()
    }

    pub fn k(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dk()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_k + j]
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dy() * self.dk()
    }

    /// `∫ W dk` on the `y` grid.
    pub fn k_integrated(&self) -> Vec<f64> {
        self.values
            .chunks(self.n_k)
            .map(|row| row.iter().sum::<f64>() * self.dk())
            .collect()
    }

    /// Cell averages on a coarser grid whose sizes divide the current ones.
    pub fn coarsen(&self, n_y: usize, n_k: usize) -> Result<Self> {
        if n_y == 0 || n_k == 0 || !self.n_y.is_multiple_of(n_y) || !self.n_k.is_multiple_of(n_k) {
            return Err(Error::Config(format!(
                "cannot coarsen {}x{} to {n_y}x{n_k}",
                self.n_y, self.n_k
            )));
        }
        let (fy, fk) = (self.n_y / n_y, self.n_k / n_k);
        let mut out = Self::zeros(n_y, n_k, self.origin, self.length)?;
        out.time = self.time;
        for i in 0..self.n_y {
            for j in 0..self.n_k {
                out.values[(i / fy) * n_k + j / fk] += self.values[i * self.n_k + j];
            }
        }
        let inv = 1.0 / (fy * fk) as f64;
        out.values.iter_mut().for_each(|v| *v *= inv);
        Ok(out)
    }

    /// `∫∫ |W − other| dy dk`.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if (self.n_y, self.n_k) != (other.n_y, other.n_k) || self.length != other.length {
            return Err(Error::Config("fields live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dy()
            * self.dk())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# time = {:e}", self.time)?;
        writeln!(w, "y,k,value")?;
        for i in 0..self.n_y {
            for j in 0..self.n_k {
                writeln!(w, "{:e},{:e},{:e}", self.y(i), self.k(j), self.at(i, j))?;
            }
        }
        Ok(())
    }
}

/// Strang-split solver for `∂_t W + v(k) ∂_y W = γ ∫ C(k,k')(W(k') − W(k)) dk'`.
///
/// Advection is first-order upwind, sub-cycled under the CFL limit; the
/// collision operator on the `k` grid is symmetric, so its exponential is
/// formed once from an eigen-decomposition and conserves mass.
#[derive(Clone, Debug)]
pub struct TransportSolver {
    pub dispersion: DispersionSpec,
    pub kernel: KernelSpec,
    pub gamma: f64,
    pub cfl: f64,
    /// Time between collision half-steps' midpoints (the splitting step).
    pub collision_dt: Option<f64>,
}

fn collision_matrix(kernel: &KernelSpec, gamma: f64, n_k: usize) -> DMatrix<f64> {
    let dk = 1.0 / n_k as f64;
    let k = |j: usize| (j as f64 + 0.5) * dk;
    let mut a = DMatrix::<f64>::zeros(n_k, n_k);
    for i in 0..n_k {
        let mut loss = 0.0;
        for j in 0..n_k {
            let c = gamma * kernel.eval(k(i), k(j)) * dk;
            a[(i, j)] += c;
            loss += c;
        }
        a[(i, i)] -= loss;
    }
    // Symmetrize against rounding.
    let at = a.transpose();
    (a + at) * 0.5
}

fn propagator(eig: &SymmetricEigen<f64, nalgebra::Dyn>, t: f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|l| (l * t).exp()),
    );
    v * DMatrix::from_diagonal(&d) * v.transpose()
}

impl TransportSolver {
    pub fn new(
        dispersion: DispersionSpec,
        kernel: KernelSpec,
        gamma: f64,
        cfl: f64,
    ) -> Result<Self> {
        dispersion.validate()?;
        kernel.validate()?;
        if !(cfl > 0.0 && cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {cfl}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self {
            dispersion,
            kernel,
            gamma,
            cfl,
            collision_dt: None,
        })
    }

    pub fn with_collision_dt(mut self, dt: f64) -> Self {
        self.collision_dt = Some(dt);
        self
    }

    pub fn solve(&self, initial: &TransportField, t_final: f64) -> Result<TransportField> {
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!(
                "t_final must be >= 0, got {t_final}"
            )));
        }
        let mut w = initial.clone();
        let (n_y, n_k) = (w.n_y, w.n_k);
        let dy = w.dy();
        let vel: Vec<f64> = (0..n_k).map(|j| self.dispersion.velocity(w.k(j))).collect();
        let vmax = vel.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let dt_adv = if vmax > 0.0 {
            self.cfl * dy / vmax
        } else {
            f64::INFINITY
        };
        let a = collision_matrix(&self.kernel, self.gamma, n_k);
        let rate_max = (0..n_k).map(|i| -a[(i, i)]).fold(0.0, f64::max);
        let h = self.collision_dt.unwrap_or_else(|| {
            let by_rate = if rate_max > 0.0 {
                0.1 / rate_max
            } else {
                f64::INFINITY
            };
            by_rate
                .min(if dt_adv.is_finite() {
                    8.0 * dt_adv
                } else {
                    f64::INFINITY
                })
                .min(t_final.max(1e-12))
        });
        if !(h > 0.0) {
            return Err(Error::Config("collision step must be positive".into()));
        }
        let collide = self.gamma > 0.0;
        let eig = collide.then(|| SymmetricEigen::new(a));
        let half = eig.as_ref().map(|e| propagator(e, 0.5 * h));

        let mut row = vec![0.0; n_k];
        let mut apply = |w: &mut TransportField, e: &DMatrix<f64>| {
            for i in 0..n_y {
                let cur = &mut w.values[i * n_k..(i + 1) * n_k];
                for (r, ecol) in row.iter_mut().zip(e.row_iter()) {
                    *r = ecol.iter().zip(cur.iter()).map(|(a, b)| a * b).sum();
                }
                for (c, r) in cur.iter_mut().zip(&row) {
                    *c = *r;
                }
            }
        };
        let mut scratch = w.values.clone();
        let mut advect = |w: &mut TransportField, span: f64| {
            if vmax == 0.0 || span <= 0.0 {
                return;
            }
            let n_sub = (span / dt_adv).ceil().max(1.0) as usize;
            let nu: Vec<f64> = vel.iter().map(|v| v * span / n_sub as f64 / dy).collect();
            for _ in 0..n_sub {
                scratch.copy_from_slice(&w.values);
                for i in 0..n_y {
                    let up = if i == 0 { n_y - 1 } else { i - 1 };
                    let dn = if i + 1 == n_y { 0 } else { i + 1 };
                    for j in 0..n_k {
                        let c = scratch[i * n_k + j];
                        w.values[i * n_k + j] = if nu[j] >= 0.0 {
                            c - nu[j] * (c - scratch[up * n_k + j])
                        } else {
                            c - nu[j] * (scratch[dn * n_k + j] - c)
                        };
                    }
                }
            }
        };

        let t0 = w.time;
        let mut t = 0.0;
        while t < t_final - 1e-12 * t_final.max(1.0) {
            let step = h.min(t_final - t);
            let e = match (&eig, &half) {
                (Some(_), Some(p)) if (step - h).abs() <= 1e-12 * h => Some(p.clone()),
                (Some(eg), _) => Some(propagator(eg, 0.5 * step)),
                _ => None,
            };
            if let Some(e) = &e {
                apply(&mut w, e);
            }
            advect(&mut w, step);
            if let Some(e) = &e {
                apply(&mut w, e);
            }
            t += step;
        }
        w.time = t0 + t_final;
        if w.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical(
                "non-finite transport field",
                format!("t = {}", w.time),
            ));
        }
        Ok(w)
    }
}

/// One-call form of [`TransportSolver::solve`].
pub fn solve_transport(
    initial: &TransportField,
    disp: DispersionSpec,
    kernel: KernelSpec,
    gamma: f64,
    t_final: f64,
    cfl: f64,
) -> Result<TransportField> {
    TransportSolver::new(disp, kernel, gamma, cfl)?.solve(initial, t_final)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_fixed() {
        let w0 = TransportField::from_fn(32, 16, 0.0, 4.0, |_, _| 0.7).unwrap();
        let w = solve_transport(
            &w0,
            DispersionSpec::Unpinned { c: 2.0 },
            KernelSpec::Product { strength: 1.0 },
            1.0,
            2.0,
            0.8,
        )
        .unwrap();
        for v in &w.values {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn collisions_conserve_mass_and_relax_to_uniform_in_k() {
        let w0 = TransportField::from_fn(2, 32, 0.0, 1.0, |_, k| if k < 0.5 { 2.0 } else { 0.0 })
            .unwrap();
        let disp = DispersionSpec::Unpinned { c: 1e-9 };
        let w = solve_transport(
            &w0,
            disp,
            KernelSpec::Constant { value: 1.0 },
            1.0,
            20.0,
            0.5,
        )
        .unwrap();
        assert!((w.mass() - w0.mass()).abs() < 1e-8 * w0.mass());
        for v in &w.values {
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_cfl() {
        let w0 = TransportField::zeros(4, 4, 0.0, 1.0).unwrap();
        let r = solve_transport(
            &w0,
            DispersionSpec::Unpinned { c: 2.0 },
            KernelSpec::Product { strength: 1.0 },
            1.0,
            1.0,
            1.2,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
