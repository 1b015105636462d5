//! Small statistics helpers shared by the estimators.

/// Welford running mean and variance.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Running {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &Running) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Running {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut r = Running::new();
        for x in iter {
            r.push(x);
        }
        r
    }
}

/// Mean and standard error of a sample.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let r: Running = xs.iter().copied().collect();
    (r.mean(), r.std_error())
}

/// Batch-means estimate of the mean of a correlated series and its standard error.
///
/// The trailing partial block is dropped.
pub fn batch_means(series: &[f64], n_blocks: usize) -> (f64, f64) {
    assert!(n_blocks >= 2, "batch means needs at least two blocks");
    let len = series.len() / n_blocks;
    assert!(len > 0, "series shorter than the number of blocks");
    let blocks: Vec<f64> = series
        .chunks_exact(len)
        .take(n_blocks)
        .map(|b| b.iter().sum::<f64>() / len as f64)
        .collect();
    mean_stderr(&blocks)
}

/// Sample excess kurtosis.
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (m2, m4) = xs.iter().fold((0.0, 0.0), |(m2, m4), &x| {
        let d2 = (x - mean) * (x - mean);
        (m2 + d2, m4 + d2 * d2)
    });
    let m2 = m2 / n;
    let m4 = m4 / n;
    m4 / (m2 * m2) - 3.0
}

/// Empirical quantile by linear interpolation of the order statistics. `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Ordinary least squares `y = intercept + slope * x`; returns `(slope, intercept, slope_stderr)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let se = if x.len() > 2 {
        (resid / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, se)
}


/// Inverse-CDF sampler for a density given at equally spaced nodes and
/// interpolated linearly between them.
#[derive(Clone, Debug)]
pub struct LinearDensityTable {
    lo: f64,
    h: f64,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl LinearDensityTable {
    /// `density[i]` is the (unnormalized) density at `lo + i·h`.
    pub fn new(lo: f64, hi: f64, density: Vec<f64>) -> Self {
        assert!(density.len() >= 2 && hi > lo);
        let h = (hi - lo) / (density.len() - 1) as f64;
        let mut cdf = Vec::with_capacity(density.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in density.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        Self {
            lo,
            h,
            density,
            cdf,
        }
    }

    pub fn total(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    /// Point with `CDF = u` for `u ∈ [0, 1)`.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u * self.total();
        let i = self
            .cdf
            .partition_point(|c| *c <= target)
            .clamp(1, self.cdf.len() - 1)
            - 1;
        let (f0, f1) = (self.density[i], self.density[i + 1]);
        let m = target - self.cdf[i];
        // f0 h t + (f1 − f0) h t²/2 = m
        let a = 0.5 * (f1 - f0) * self.h;
        let b = f0 * self.h;
        let t = if a.abs() <= 1e-14 * b.abs() {
            if b > 0.0 {
                m / b
            } else {
                0.5
            }
        } else {
            let disc = (b * b + 4.0 * a * m).max(0.0);
            2.0 * m / (b + disc.sqrt())
        };
        self.lo + self.h * (i as f64 + t.clamp(0.0, 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.density.len() - 1;
        let s = (x - self.lo) / self.h;
        if s <= 0.0 {
            return 0.0;
        }
        if s >= n as f64 {
            return 1.0;
        }
        let i = s.floor() as usize;
        let t = s - i as f64;
        let (f0, f1) = (self.density[i], self.density[i + 1]);
        (self.cdf[i] + self.h * (f0 * t + 0.5 * (f1 - f0) * t * t)) / self.total()
    }
}

#[cfg(test)]
mod table_tests {
    use super::LinearDensityTable;

    #[test]
    fn quantile_inverts_cdf() {
        let t = LinearDensityTable::new(-1.0, 2.0, vec![0.0, 1.0, 3.0, 0.5, 0.0, 2.0]);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!((t.cdf(t.quantile(u)) - u).abs() < 1e-12);
        }
    }
}
