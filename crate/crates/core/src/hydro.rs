//! Finite-volume solver for the Euler system
//!
//! ```text
//! ∂_t r = ∂_y p,   ∂_t p = ∂_y P(r, e − p²/2),   ∂_t e = ∂_y (p P)
//! ```
//!
//! closed by a tabulated pressure. The scheme is first-order local
//! Lax–Friedrichs in conservation form with fluxes `(−p, −P, −pP)`, so cell
//! sums of `r`, `p` and `e` are conserved up to rounding. Characteristic
//! speeds are `0, ±c` with `c² = ∂_r P + P ∂_u P`, where `u = e − p²/2`.
//! Runs halt with [`Error::BlowUp`] when a cell leaves the table or the
//! system loses hyperbolicity; shocks are not resolved.

use crate::error::{Error, Result};
use crate::thermo::ThermoTable;
use std::io::Write;

/// Cell averages `(r, p, e)` on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HydroField {
    pub origin: f64,
    pub dy: f64,
    pub time: f64,
    pub cells: Vec<[f64; 3]>,
}

impl HydroField {
    pub fn new(origin: f64, length: f64, cells: Vec<[f64; 3]>) -> Result<Self> {
        if cells.len() < 3 || !(length > 0.0 && length.is_finite()) {
            return Err(Error::Config(
                "hydro grid needs at least 3 cells and a positive length".into(),
            ));
        }
        let dy = length / cells.len() as f64;
        Ok(Self {
            origin,
            dy,
            time: 0.0,
            cells,
        })
    }

    /// Samples `f(y) = (r, p, e)` at cell centres.
    pub fn from_fn<F: Fn(f64) -> [f64; 3]>(
        n: usize,
        origin: f64,
        length: f64,
        f: F,
    ) -> Result<Self> {
        let dy = length / n.max(1) as f64;
        Self::new(
            origin,
            length,
            (0..n).map(|i| f(origin + (i as f64 + 0.5) * dy)).collect(),
        )
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn length(&self) -> f64 {
        self.dy * self.cells.len() as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.dy
    }

    /// Internal energy `e − p²/2` of cell `i`.
    pub fn internal_energy(&self, i: usize) -> f64 {
        let [_, p, e] = self.cells[i];
        e - 0.5 * p * p
    }

    /// `∫ (r, p, e) dy`.
    pub fn totals(&self) -> [f64; 3] {
        let mut t = [0.0; 3];
        for c in &self.cells {
            for m in 0..3 {
                t[m] += c[m];
            }
        }
        t.map(|v| v * self.dy)
    }

    /// Adds `v` to every momentum and the matching kinetic energy.
    pub fn boosted(&self, v: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            let u = c[2] - 0.5 * c[1] * c[1];
            c[1] += v;
            c[2] = u + 0.5 * c[1] * c[1];
        }
        out
    }

    /// Writes `y,r,p,e,S`.
    pub fn write_csv<W: Write>(&self, table: &ThermoTable, mut w: W) -> Result<()> {
        let s = entropy_diagnostic(self, table)?;
        writeln!(w, "# time = {:e}", self.time)?;
        writeln!(w, "y,r,p,e,S")?;
        for (i, c) in self.cells.iter().enumerate() {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{:e}",
                self.y(i),
                c[0],
                c[1],
                c[2],
                s.per_cell[i]
            )?;
        }
        Ok(())
    }
}

/// Per-cell entropy `S(r, e − p²/2)` and its cell sum `Σ S dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyDiagnostic {
    pub per_cell: Vec<f64>,
    pub total: f64,
}

pub fn entropy_diagnostic(field: &HydroField, table: &ThermoTable) -> Result<EntropyDiagnostic> {
    let per_cell = (0..field.n_cells())
        .map(|i| table.entropy(field.cells[i][0], field.internal_energy(i)))
        .collect::<Result<Vec<_>>>()?;
    let total = per_cell.iter().sum::<f64>() * field.dy;
    Ok(EntropyDiagnostic { per_cell, total })
}

/// Pressure and sound speed of one cell.
fn closure(table: &ThermoTable, cell: usize, time: f64, r: f64, u: f64) -> Result<(f64, f64)> {
    let blow = |reason: String| Error::BlowUp { cell, time, reason };
    if !(r.is_finite() && u.is_finite()) {
        return Err(blow("non-finite state".into()));
    }
    if !table.contains(r, u) {
        return Err(blow(format!(
            "state (r = {r}, u = {u}) left the thermodynamic table"
        )));
    }
    let pressure = table.pressure(r, u)?;
    let (pr, pu) = table.pressure_gradient(r, u)?;
    let c2 = pr + pressure * pu;
    if !(c2 > 0.0) {
        return Err(blow(format!("loss of hyperbolicity, c² = {c2}")));
    }
    Ok((pressure, c2.sqrt()))
}

fn closures(field: &HydroField, table: &ThermoTable) -> Result<Vec<(f64, f64)>> {
    (0..field.n_cells())
        .map(|i| {
            closure(
                table,
                i,
                field.time,
                field.cells[i][0],
                field.internal_energy(i),
            )
        })
        .collect()
}

/// Largest stable time step `cfl·dy / max c`.
pub fn stable_dt(field: &HydroField, table: &ThermoTable, cfl: f64) -> Result<f64> {
    let cmax = closures(field, table)?
        .iter()
        .fold(0.0f64, |m, &(_, c)| m.max(c));
    Ok(cfl * field.dy / cmax)
}

fn check_cfl(cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(Error::Config(format!(
            "cfl must lie in (0, 0.5], got {cfl}"
        )));
    }
    Ok(())
}

fn step_with(field: &HydroField, table: &ThermoTable, cfl: f64, dt_cap: f64) -> Result<HydroField> {
    let n = field.n_cells();
    let cl = closures(field, table)?;
    let cmax = cl.iter().fold(0.0f64, |m, &(_, c)| m.max(c));
    let dt = (cfl * field.dy / cmax).min(dt_cap);
    let flux = |i: usize| {
        let [_, p, _] = field.cells[i];
        let pr = cl[i].0;
        [-p, -pr, -p * pr]
    };
    // Interface i+1/2 between cells i and i+1 (periodic).
    let mut fluxes = Vec::with_capacity(n);
    for i in 0..n {
        let j = if i + 1 == n { 0 } else { i + 1 };
        let (fl, fr) = (flux(i), flux(j));
        let a = cl[i].1.max(cl[j].1);
        let (ul, ur) = (field.cells[i], field.cells[j]);
        let mut f = [0.0; 3];
        for m in 0..3 {
            f[m] = 0.5 * (fl[m] + fr[m]) - 0.5 * a * (ur[m] - ul[m]);
        }
        fluxes.push(f);
    }
    let lam = dt / field.dy;
    let mut out = field.clone();
    for i in 0..n {
        let left = if i == 0 { n - 1 } else { i - 1 };
        for m in 0..3 {
            out.cells[i][m] -= lam * (fluxes[i][m] - fluxes[left][m]);
        }
    }
    out.time = field.time + dt;
    for i in 0..n {
        let (r, u) = (out.cells[i][0], out.internal_energy(i));
        if !(r.is_finite() && u.is_finite()) || !table.contains(r, u) {
            return Err(Error::BlowUp {
                cell: i,
                time: out.time,
                reason: format!("state (r = {r}, u = {u}) left the admissible domain"),
            });
        }
    }
    Ok(out)
}

/// One Rusanov step with the CFL-limited time step; `cfl ∈ (0, 0.5]`.
pub fn euler_step(field: &HydroField, table: &ThermoTable, cfl: f64) -> Result<HydroField> {
    check_cfl(cfl)?;
    step_with(field, table, cfl, f64::INFINITY)
}

/// Result of [`run_euler`]: final field and the per-step history.
#[derive(Clone, Debug, PartialEq)]
pub struct HydroRun {
    pub field: HydroField,
    pub times: Vec<f64>,
    pub entropy_totals: Vec<f64>,
    pub conserved_totals: Vec<[f64; 3]>,
}

impl HydroRun {
    /// Largest relative change of any conserved total over the run.
    pub fn conservation_error(&self) -> f64 {
        let t0 = self.conserved_totals[0];
        let scale = t0
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        self.conserved_totals
            .iter()
            .flat_map(|t| (0..3).map(move |m| (t[m] - t0[m]).abs()))
            .fold(0.0, f64::max)
            / scale
    }

    pub fn entropy_drift(&self) -> f64 {
        self.entropy_totals.last().unwrap_or(&0.0) - self.entropy_totals.first().unwrap_or(&0.0)
    }
}

/// Steps to exactly `t_final`, recording entropy and conserved totals after
/// every step.
pub fn run_euler(
    initial: &HydroField,
    table: &ThermoTable,
    cfl: f64,
    t_final: f64,
) -> Result<HydroRun> {
    check_cfl(cfl)?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Config(format!(
            "t_final must be >= 0, got {t_final}"
        )));
    }
    let end = initial.time + t_final;
    let mut field = initial.clone();
    let mut times = vec![field.time];
    let mut entropy_totals = vec![entropy_diagnostic(&field, table)?.total];
    let mut conserved_totals = vec![field.totals()];
    while field.time < end - 1e-12 * end.abs().max(1.0) {
        field = step_with(&field, table, cfl, end - field.time)?;
        times.push(field.time);
        entropy_totals.push(entropy_diagnostic(&field, table)?.total);
        conserved_totals.push(field.totals());
    }
    field.time = end;
    Ok(HydroRun {
        field,
        times,
        entropy_totals,
        conserved_totals,
    })
}
