use super::legendre::{entropy_from, ThermoPoint};
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    Cubic,
}

/// Field selector for table lookups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Lambda,
    Beta,
    Pressure,
    Entropy,
    LogZ,
}

impl Field {
    fn of(self, p: &ThermoPoint) -> f64 {
        match self {
            Field::Lambda => p.lambda,
            Field::Beta => p.beta,
            Field::Pressure => p.pressure,
            Field::Entropy => p.entropy,
            Field::LogZ => p.log_z,
        }
    }
}

/// Thermodynamic functions tabulated on a uniform `(r, u)` grid.
///
/// Immutable once built; lookups outside the grid are domain errors.
#[derive(Clone, Debug)]
pub struct ThermoTable {
    r_min: f64,
    r_max: f64,
    u_min: f64,
    u_max: f64,
    nr: usize,
    nu: usize,
    order: Interpolation,
    points: Vec<ThermoPoint>,
}

impl ThermoTable {
    /// Solves the entropy dual at every node. Rows in `r` are built in
    /// parallel and warm-started along `u`.
    pub fn build(
        spec: &PotentialSpec,
        r_range: (f64, f64),
        u_range: (f64, f64),
        nr: usize,
        nu: usize,
        order: Interpolation,
    ) -> Result<Self> {
        let (r_min, r_max) = r_range;
        let (u_min, u_max) = u_range;
        if nr < 4 || nu < 4 {
            return Err(Error::Config(format!(
                "table needs at least 4x4 nodes, got {nr}x{nu}"
            )));
        }
        if !(r_min < r_max && u_min < u_max)
            || ![r_min, r_max, u_min, u_max].iter().all(|x| x.is_finite())
        {
            return Err(Error::Config(
                "table ranges must be finite and increasing".into(),
            ));
        }
        let dr = (r_max - r_min) / (nr - 1) as f64;
        let rows: Vec<Result<Vec<ThermoPoint>>> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let r = r_min + dr * i as f64;
                let ground = spec.ground_energy(r);
                if u_min <= ground {
                    return Err(Error::Domain(format!(
                        "table lower energy {u_min} is not above the ground state {ground} at r = {r}"
                    )));
                }
                let du = (u_max - u_min) / (nu - 1) as f64;
                let mut row = Vec::with_capacity(nu);
                let mut guess = None;
                for j in 0..nu {
                    let p = entropy_from(spec, r, u_min + du * j as f64, guess)?;
                    guess = Some((p.lambda, p.beta));
                    row.push(p);
                }
                Ok(row)
            })
            .collect();
        let mut points = Vec::with_capacity(nr * nu);
        for row in rows {
            points.extend(row?);
        }
        Ok(Self {
            r_min,
            r_max,
            u_min,
            u_max,
            nr,
            nu,
            order,
            points,
        })
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r_min, self.r_max)
    }

    pub fn u_range(&self) -> (f64, f64) {
        (self.u_min, self.u_max)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nr, self.nu)
    }

    pub fn order(&self) -> Interpolation {
        self.order
    }

    pub fn node(&self, i: usize, j: usize) -> &ThermoPoint {
        &self.points[i * self.nu + j]
    }

    fn dr(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nr - 1) as f64
    }

    fn du(&self) -> f64 {
        (self.u_max - self.u_min) / (self.nu - 1) as f64
    }

    pub fn contains(&self, r: f64, u: f64) -> bool {
        r >= self.r_min && r <= self.r_max && u >= self.u_min && u <= self.u_max
    }

    /// Interpolated value of `field` at `(r, u)`.
    pub fn value(&self, field: Field, r: f64, u: f64) -> Result<f64> {
        if !self.contains(r, u) {
            return Err(Error::Domain(format!(
                "({r}, {u}) is outside the thermodynamic table [{}, {}] x [{}, {}]",
                self.r_min, self.r_max, self.u_min, self.u_max
            )));
        }
        let x = (r - self.r_min) / self.dr();
        let y = (u - self.u_min) / self.du();
        let i = (x.floor() as usize).min(self.nr - 2);
        let j = (y.floor() as usize).min(self.nu - 2);
        let (tx, ty) = (x - i as f64, y - j as f64);
        let at = |a: isize, b: isize| {
            let a = a.clamp(0, self.nr as isize - 1) as usize;
            let b = b.clamp(0, self.nu as isize - 1) as usize;
            field.of(self.node(a, b))
        };
        let (i, j) = (i as isize, j as isize);
        Ok(match self.order {
            Interpolation::Linear => {
                let a = at(i, j) * (1.0 - ty) + at(i, j + 1) * ty;
                let b = at(i + 1, j) * (1.0 - ty) + at(i + 1, j + 1) * ty;
                a * (1.0 - tx) + b * tx
            }
            Interpolation::Cubic => {
                let mut col = [0.0; 4];
                for (k, c) in col.iter_mut().enumerate() {
                    let ii = i - 1 + k as isize;
                    *c = catmull_rom(
                        [at(ii, j - 1), at(ii, j), at(ii, j + 1), at(ii, j + 2)],
                        ty,
                        j == 0,
                        j as usize + 2 == self.nu,
                    );
                }
                catmull_rom(col, tx, i == 0, i as usize + 2 == self.nr)
            }
        })
    }

    pub fn pressure(&self, r: f64, u: f64) -> Result<f64> {
        self.value(Field::Pressure, r, u)
    }

    pub fn entropy(&self, r: f64, u: f64) -> Result<f64> {
        self.value(Field::Entropy, r, u)
    }

    /// `(∂P/∂r, ∂P/∂u)` by central differences of the interpolant, one-sided
    /// at the table edges.
    pub fn pressure_gradient(&self, r: f64, u: f64) -> Result<(f64, f64)> {
        let hr = 0.5 * self.dr();
        let hu = 0.5 * self.du();
        let diff = |lo: f64, hi: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            Ok((f(hi)? - f(lo)?) / (hi - lo))
        };
        let (r0, r1) = ((r - hr).max(self.r_min), (r + hr).min(self.r_max));
        let (u0, u1) = ((u - hu).max(self.u_min), (u + hu).min(self.u_max));
        let pr = diff(r0, r1, &|x| self.pressure(x, u))?;
        let pu = diff(u0, u1, &|x| self.pressure(r, x))?;
        Ok((pr, pu))
    }

    /// Largest positive eigenvalue of the discrete Hessian of `S` over interior
    /// nodes, scaled by the local curvature magnitude (0 for a concave table).
    pub fn concavity_violation(&self) -> f64 {
        let (dr, du) = (self.dr(), self.du());
        let s = |i: usize, j: usize| self.node(i, j).entropy;
        let mut worst = 0.0f64;
        for i in 1..self.nr - 1 {
            for j in 1..self.nu - 1 {
                let srr = (s(i + 1, j) - 2.0 * s(i, j) + s(i - 1, j)) / (dr * dr);
                let suu = (s(i, j + 1) - 2.0 * s(i, j) + s(i, j - 1)) / (du * du);
                let sru = (s(i + 1, j + 1) - s(i + 1, j - 1) - s(i - 1, j + 1) + s(i - 1, j - 1))
                    / (4.0 * dr * du);
                let tr = srr + suu;
                let det = srr * suu - sru * sru;
                let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                let top = 0.5 * tr + disc;
                let scale = srr.abs() + suu.abs() + 1e-300;
                worst = worst.max(top / scale);
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# nr = {}", self.nr)?;
        writeln!(w, "# nu = {}", self.nu)?;
        writeln!(
            w,
            "# interpolation = {}",
            match self.order {
                Interpolation::Linear => "linear",
                Interpolation::Cubic => "cubic",
            }
        )?;
        writeln!(w, "r,u,lambda,beta,pressure,entropy,logZ")?;
        for p in &self.points {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                p.rbar, p.ubar, p.lambda, p.beta, p.pressure, p.entropy, p.log_z
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut nr = None;
        let mut nu = None;
        let mut order = Interpolation::Cubic;
        let mut points = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once('=') {
                    match k.trim() {
                        "nr" => nr = v.trim().parse().ok(),
                        "nu" => nu = v.trim().parse().ok(),
                        "interpolation" => {
                            order = match v.trim() {
                                "linear" => Interpolation::Linear,
                                _ => Interpolation::Cubic,
                            }
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != "r,u,lambda,beta,pressure,entropy,logZ" {
                    return Err(Error::Config(format!(
                        "line {}: unexpected table header",
                        lineno + 1
                    )));
                }
                header_seen = true;
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            if v.len() != 7 {
                return Err(Error::Config(format!(
                    "line {}: expected 7 columns",
                    lineno + 1
                )));
            }
            points.push(ThermoPoint {
                rbar: v[0],
                ubar: v[1],
                lambda: v[2],
                beta: v[3],
                pressure: v[4],
                entropy: v[5],
                log_z: v[6],
            });
        }
        let (nr, nu) = match (nr, nu) {
            (Some(a), Some(b)) if a >= 4 && b >= 4 && a * b == points.len() => (a, b),
            _ => {
                return Err(Error::Config(
                    "table metadata does not match the number of rows".into(),
                ))
            }
        };
        let first = points[0];
        let last = points[points.len() - 1];
        Ok(Self {
            r_min: first.rbar,
            r_max: last.rbar,
            u_min: first.ubar,
            u_max: last.ubar,
            nr,
            nu,
            order,
            points,
        })
    }
}

/// Catmull-Rom interpolation between `v[1]` and `v[2]`; at a boundary the
/// missing outer node degrades the stencil to a quadratic.
fn catmull_rom(v: [f64; 4], t: f64, at_lo: bool, at_hi: bool) -> f64 {
    let m1 = if at_lo {
        v[2] - v[1]
    } else {
        0.5 * (v[2] - v[0])
    };
    let m2 = if at_hi {
        v[2] - v[1]
    } else {
        0.5 * (v[3] - v[1])
    };
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * v[1]
        + (t3 - 2.0 * t2 + t) * m1
        + (-2.0 * t3 + 3.0 * t2) * v[2]
        + (t3 - t2) * m2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_table_reproduces_pressure() {
        let spec = PotentialSpec::harmonic(1.0);
        let t = ThermoTable::build(&spec, (-0.5, 0.5), (0.5, 2.0), 12, 12, Interpolation::Cubic)
            .unwrap();
        for &(r, u) in &[(0.0, 1.0), (0.21, 0.77), (-0.43, 1.9)] {
            assert_relative_eq!(t.pressure(r, u).unwrap(), r, epsilon = 1e-9);
        }
        let (pr, pu) = t.pressure_gradient(0.1, 1.0).unwrap();
        assert_relative_eq!(pr, 1.0, epsilon = 1e-8);
        assert!(pu.abs() < 1e-8);
        assert!(t.pressure(0.6, 1.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let spec = PotentialSpec::fpu(1.0, 0.0, 1.0);
        let t = ThermoTable::build(&spec, (-0.3, 0.3), (0.5, 1.5), 5, 6, Interpolation::Linear)
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = ThermoTable::read_csv(&buf[..]).unwrap();
        assert_eq!(back.shape(), (5, 6));
        assert_eq!(back.order(), Interpolation::Linear);
        let (a, b) = (
            t.entropy(0.1, 0.9).unwrap(),
            back.entropy(0.1, 0.9).unwrap(),
        );
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn lower_energy_must_clear_the_ground_state() {
        let spec = PotentialSpec::harmonic(1.0);
        let r = ThermoTable::build(&spec, (-2.0, 2.0), (1.0, 3.0), 5, 5, Interpolation::Linear);
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
