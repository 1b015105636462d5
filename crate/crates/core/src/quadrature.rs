//! Adaptive Gauss–Kronrod (7/15) quadrature for smooth, possibly vector-valued integrands.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights on the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Piece<const M: usize> {
    a: f64,
    b: f64,
    value: [f64; M],
    error: f64,
}

fn gk15<const M: usize, F: FnMut(f64) -> [f64; M]>(f: &mut F, a: f64, b: f64) -> Piece<M> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; M];
    let mut gauss = [0.0; M];
    let fc = f(c);
    for m in 0..M {
        kron[m] = WGK[7] * fc[m];
        gauss[m] = WG[3] * fc[m];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for m in 0..M {
            let s = f1[m] + f2[m];
            kron[m] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[m] += WG[j / 2] * s;
            }
        }
    }
    let mut error = 0.0f64;
    for m in 0..M {
        kron[m] *= h;
        gauss[m] *= h;
        error = error.max((kron[m] - gauss[m]).abs());
    }
    Piece {
        a,
        b,
        value: kron,
        error,
    }
}

/// Integrates every component of `f` over `[a, b]`.
///
/// Refinement stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * max_m |I_m|)`.
pub fn integrate_vec<const M: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> [f64; M]
where
    F: FnMut(f64) -> [f64; M],
{
    if a == b {
        return [0.0; M];
    }
    let mut pieces = vec![gk15(&mut f, a, b)];
    loop {
        let mut total = [0.0; M];
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            for m in 0..M {
                total[m] += p.value[m];
            }
            err += p.error;
            if p.error > pieces[worst].error {
                worst = i;
            }
        }
        let scale = total.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if err <= abs_tol.max(rel_tol * scale) || pieces.len() >= MAX_INTERVALS {
            return total;
        }
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval cannot be split further in floating point
            pieces.push(Piece { error: 0.0, ..p });
            continue;
        }
        pieces.push(gk15(&mut f, p.a, mid));
        pieces.push(gk15(&mut f, mid, p.b));
    }
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> f64 {
    integrate_vec::<1, _>(|x| [f(x)], a, b, rel_tol, abs_tol)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(8) - 3.0 * x, -1.0, 2.0, 1e-14, 0.0);
        assert_relative_eq!(v, (512.0 + 1.0) / 9.0 - 4.5, max_relative = 1e-13);
    }

    #[test]
    fn gaussian_mass() {
        let v = integrate(|x| (-x * x / 2.0).exp(), -40.0, 40.0, 1e-13, 0.0);
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn vector_components_share_nodes() {
        let v = integrate_vec(|x| [1.0, x, x * x], 0.0, 1.0, 1e-14, 0.0);
        assert_relative_eq!(v[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(v[1], 0.5, max_relative = 1e-14);
        assert_relative_eq!(v[2], 1.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, 1e-10, 0.0), 0.0);
    }
}
