use crate::dynamics::{ChainState, Configuration};
use crate::error::{Error, Result};
use crate::thermo::PotentialSpec;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

/// Discretization of the Wigner distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerConfig {
    pub epsilon: f64,
    /// Standard deviation of the Gaussian window in `η`, in units of `1/N`.
    pub smoothing: f64,
    /// Points of the macroscopic position grid on `[0, εN)`.
    pub n_y: usize,
    /// Bins of the mode variable on `[0, 1)`.
    pub n_k: usize,
}

impl WignerConfig {
    pub fn new(epsilon: f64, n_y: usize, n_k: usize) -> Self {
        Self {
            epsilon,
            smoothing: 8.0,
            n_y,
            n_k,
        }
    }

    fn half_width(&self) -> usize {
        (5.0 * self.smoothing).ceil() as usize
    }
}

/// Smoothed Wigner distribution `W^ε(y, k)` on a `(y, k)` grid, stored
/// y-major. The real part carries the energy density.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub epsilon: f64,
    pub smoothing: f64,
    pub n_y: usize,
    pub n_k: usize,
    /// Length `εN` of the periodic macroscopic domain.
    pub length: f64,
    pub values: Vec<Complex64>,
}

impl WignerField {
    pub fn dy(&self) -> f64 {
        self.length / self.n_y as f64
    }

    pub fn dk(&self) -> f64 {
        1.0 / self.n_k as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 * self.dy()
    }

    /// Center of bin `j`.
    pub fn k(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dk()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.n_k + j]
    }

    /// `∫∫ Re W dy dk`.
    pub fn total(&self) -> f64 {
        self.values.iter().map(|v| v.re).sum::<f64>() * self.dy() * self.dk()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// CSV triples `y,k,value` with the real part.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# epsilon = {}", self.epsilon)?;
        writeln!(w, "# smoothing = {}", self.smoothing)?;
        writeln!(w, "y,k,value")?;
        for i in 0..self.n_y {
            for j in 0..self.n_k {
                writeln!(w, "{:e},{:e},{:e}", self.y(i), self.k(j), self.at(i, j).re)?;
            }
        }
        Ok(())
    }
}

/// Linear-lattice parameters `(a, ν)`; errors for anharmonic chains.
fn linear_parameters(spec: &PotentialSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    if !spec.is_harmonic() {
        return Err(Error::Unsupported(
            "the Wigner distribution is defined for harmonic chains only".into(),
        ));
    }
    Ok((spec.harmonic_coefficient(), spec.pinning_frequency()))
}

/// `ω(k)` of the linear lattice at `k = j/N`.
pub fn lattice_frequency(a: f64, nu: f64, k: f64) -> f64 {
    let s = (PI * k).sin();
    (nu * nu + 4.0 * a * s * s).sqrt()
}

fn dft(x: &[f64], inverse: bool) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(x.len())
    } else {
        planner.plan_fft_forward(x.len())
    };
    plan.process(&mut buf);
    buf
}

/// Mode amplitudes `ψ̂_j = (ω_j q̂_j + i p̂_j)/√2` with `f̂_j = Σ_x f_x e^{-2πijx/N}`,
/// normalized so that `Σ_j |ψ̂_j|²/N` is the total energy.
///
/// For unpinned chains `ω_j q̂_j` is obtained from the stretches, and the
/// zero mode uses `√a r̂_0` in place of `ω_0 q̂_0`.
pub fn mode_amplitudes(state: &ChainState, spec: &PotentialSpec) -> Result<Vec<Complex64>> {
    let (a, nu) = linear_parameters(spec)?;
    state.check_representation(spec)?;
    let n = state.n_sites();
    let p_hat = dft(&state.momenta, false);
    let c_hat = dft(state.config.values(), false);
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let k = j as f64 / n as f64;
        let w_q = match &state.config {
            Configuration::Stretch(_) => {
                if j == 0 {
                    c_hat[0] * a.sqrt()
                } else {
                    let phase = Complex64::from_polar(1.0, 2.0 * PI * k) - 1.0;
                    c_hat[j] / phase * lattice_frequency(a, 0.0, k)
                }
            }
            Configuration::Displacement(_) => c_hat[j] * lattice_frequency(a, nu, k),
        };
        psi.push((w_q + Complex64::i() * p_hat[j]) / SQRT_2);
    }
    Ok(psi)
}

/// Inverse of [`mode_amplitudes`]: builds the real chain state whose mode
/// amplitudes are `psi`, in the representation matching `spec`.
pub fn state_from_amplitudes(psi: &[Complex64], spec: &PotentialSpec) -> Result<ChainState> {
    let (a, nu) = linear_parameters(spec)?;
    let n = psi.len();
    let mut c_hat = vec![Complex64::new(0.0, 0.0); n];
    let mut p_hat = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let m = (n - j) % n;
        let plus = (psi[j] + psi[m].conj()) / SQRT_2;
        let minus = (psi[j] - psi[m].conj()) / (SQRT_2 * Complex64::i());
        p_hat[j] = minus;
        let k = j as f64 / n as f64;
        c_hat[j] = if spec.is_pinned() {
            plus / lattice_frequency(a, nu, k)
        } else if j == 0 {
            plus / a.sqrt()
        } else {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * k) - 1.0;
            plus / lattice_frequency(a, 0.0, k) * phase
        };
    }
    let real = |spec_hat: Vec<Complex64>| -> Vec<f64> {
        let mut buf = spec_hat;
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|v| v.re / n as f64).collect()
    };
    let p = real(p_hat);
    let c = real(c_hat);
    let config = if spec.is_pinned() {
        Configuration::Displacement(c)
    } else {
        Configuration::Stretch(c)
    };
    ChainState::new(p, config)
}

/// Smoothed discrete Wigner distribution of a harmonic chain.
///
/// Pairs of modes `(j, j+m)` contribute `ψ̂_j^* ψ̂_{j+m}/N` at
/// `k = (2j+m)/(2N)`, `η = m/N`; the `η` sum is weighted by a Gaussian of
/// width `smoothing/N` and the result is averaged over `k` bins.
pub fn wigner_transform(
    state: &ChainState,
    spec: &PotentialSpec,
    cfg: &WignerConfig,
) -> Result<WignerField> {
    let psi = mode_amplitudes(state, spec)?;
    wigner_from_amplitudes(&psi, cfg)
}

/// Like [`wigner_transform`] starting from mode amplitudes.
pub fn wigner_from_amplitudes(psi: &[Complex64], cfg: &WignerConfig) -> Result<WignerField> {
    let n = psi.len();
    if !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "n_sites must be a power of two, got {n}"
        )));
    }
    if !(cfg.epsilon > 0.0 && cfg.smoothing > 0.0) {
        return Err(Error::Config(
            "epsilon and smoothing must be positive".into(),
        ));
    }
    if !cfg.n_k.is_power_of_two() || cfg.n_k > 2 * n {
        return Err(Error::Config(format!(
            "n_k must be a power of two <= 2N, got {}",
            cfg.n_k
        )));
    }
    let mmax = cfg.half_width().min(n / 2 - 1);
    if cfg.n_y <= 2 * mmax {
        return Err(Error::Config(format!(
            "n_y = {} must exceed twice the window half-width {mmax}",
            cfg.n_y
        )));
    }
    let n_m = 2 * mmax + 1;
    let two_n = 2 * n;
    let bin_of = |c: usize| c * cfg.n_k / two_n;
    // F[m][b] = Σ_{c in bin b} ψ̂*_j ψ̂_{j+m} / N
    let mut f = vec![Complex64::new(0.0, 0.0); n_m * cfg.n_k];
    for (mi, m) in (-(mmax as isize)..=mmax as isize).enumerate() {
        for j in 0..n {
            let jm = (j as isize + m).rem_euclid(n as isize) as usize;
            let c = (2 * j as isize + m).rem_euclid(two_n as isize) as usize;
            f[mi * cfg.n_k + bin_of(c)] += psi[j].conj() * psi[jm];
        }
    }
    let weights: Vec<f64> = (-(mmax as isize)..=mmax as isize)
        .map(|m| (-0.5 * (m as f64 / cfg.smoothing).powi(2)).exp())
        .collect();

    let length = cfg.epsilon * n as f64;
    let scale = cfg.n_k as f64 / (length * n as f64);
    let mut values = vec![Complex64::new(0.0, 0.0); cfg.n_y * cfg.n_k];
    for i in 0..cfg.n_y {
        let y = i as f64 * length / cfg.n_y as f64;
        for (mi, m) in (-(mmax as isize)..=mmax as isize).enumerate() {
            let phase =
                Complex64::from_polar(weights[mi] * scale, 2.0 * PI * y * m as f64 / length);
            let row = &f[mi * cfg.n_k..(mi + 1) * cfg.n_k];
            for (v, fv) in values[i * cfg.n_k..(i + 1) * cfg.n_k].iter_mut().zip(row) {
                *v += phase * fv;
            }
        }
    }
    Ok(WignerField {
        epsilon: cfg.epsilon,
        smoothing: cfg.smoothing,
        n_y: cfg.n_y,
        n_k: cfg.n_k,
        length,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::total_energy;
    use crate::thermo::Pinning;

    fn noisy_state(n: usize, pinned: bool) -> ChainState {
        let p: Vec<f64> = (0..n)
            .map(|x| ((x * 7919 % 97) as f64 - 48.0) / 40.0)
            .collect();
        let c: Vec<f64> = (0..n)
            .map(|x| ((x * 104729 % 89) as f64 - 44.0) / 50.0)
            .collect();
        let config = if pinned {
            Configuration::Displacement(c)
        } else {
            Configuration::Stretch(c)
        };
        ChainState::new(p, config).unwrap()
    }

    #[test]
    fn sum_rule_and_round_trip() {
        for (spec, pinned) in [
            (PotentialSpec::harmonic(1.3), false),
            (
                PotentialSpec::harmonic(0.8).with_pinning(Pinning::Quadratic { nu: 0.7 }),
                true,
            ),
        ] {
            let s = noisy_state(64, pinned);
            let psi = mode_amplitudes(&s, &spec).unwrap();
            let h: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
            let e = total_energy(&s, &spec);
            assert!((h - e).abs() < 1e-12 * e);
            let back = state_from_amplitudes(&psi, &spec).unwrap();
            for (a, b) in back.momenta.iter().zip(&s.momenta) {
                assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in back.config.values().iter().zip(s.config.values()) {
                assert!((a - b).abs() < 1e-12);
            }
            let w = wigner_transform(&s, &spec, &WignerConfig::new(0.125, 96, 16)).unwrap();
            assert!((w.total() - e).abs() < 1e-10 * e);
            assert!(
                w.max_imaginary() < 1e-10 * w.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max)
            );
        }
    }

    #[test]
    fn anharmonic_chain_is_rejected() {
        let spec = PotentialSpec::fpu(1.0, 0.0, 1.0);
        let s = noisy_state(16, false);
        assert!(matches!(
            wigner_transform(&s, &spec, &WignerConfig::new(0.1, 96, 8)),
            Err(Error::Unsupported(_))
        ));
    }
}
