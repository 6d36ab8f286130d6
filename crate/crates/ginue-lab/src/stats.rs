//! Statistical testing and estimation helpers shared by the Monte Carlo
//! cross-checks: Kolmogorov-Smirnov tests, moment summaries, jackknife
//! errors, histograms, and least-squares fits.

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * crate::specfun::erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov tail Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2).
fn kolmogorov_q(t: f64) -> f64 {
    if t < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k as f64) * (k as f64) * t * t).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of data against a CDF. Returns (D, p); p uses the
/// Stephens finite-n correction of the asymptotic Kolmogorov law.
pub fn ks_test<F: Fn(f64) -> f64>(data: &mut [f64], cdf: F) -> (f64, f64) {
    assert!(!data.is_empty());
    data.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = data.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in data.iter().enumerate() {
        let c = cdf(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((c - lo).abs()).max((hi - c).abs());
    }
    let t = d * (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    (d, kolmogorov_q(t))
}

/// Two-sample KS test. Returns (D, p) with the effective sample size
/// n1 n2 / (n1 + n2) in the tail formula.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> (f64, f64) {
    assert!(!a.is_empty() && !b.is_empty());
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let (fa, fb) = (i as f64 / na, j as f64 / nb);
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let t = d * (ne + 0.12 + 0.11 / ne);
    (d, kolmogorov_q(t))
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    assert!(n >= 2.0);
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (unbiased).
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// Jackknife estimate and standard error of a statistic computed by
/// `estimate(omit)`, where `omit = None` uses all n samples and
/// `omit = Some(i)` leaves sample i out. Used for ratio-type estimators
/// whose naive error propagation is biased.
pub fn jackknife<F: FnMut(Option<usize>) -> f64>(n: usize, mut estimate: F) -> (f64, f64) {
    assert!(n >= 2);
    let full = estimate(None);
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for i in 0..n {
        let v = estimate(Some(i));
        sum += v;
        sumsq += v * v;
    }
    let nf = n as f64;
    let mean_loo = sum / nf;
    let var = (sumsq / nf - mean_loo * mean_loo).max(0.0) * (nf - 1.0);
    (full, var.sqrt())
}

/// Fixed-width histogram. Out-of-range samples are counted separately so
/// density normalization stays honest.
#[derive(Clone, Debug)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub out_of_range: u64,
    pub total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins >= 1);
        Histogram { lo, hi, counts: vec![0; bins], out_of_range: 0, total: 0 }
    }

    pub fn push(&mut self, x: f64) {
        self.total += 1;
        if x < self.lo || x >= self.hi {
            self.out_of_range += 1;
            return;
        }
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        let idx = (((x - self.lo) / w) as usize).min(self.counts.len() - 1);
        self.counts[idx] += 1;
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.counts.len()).map(|i| self.lo + (i as f64 + 0.5) * w).collect()
    }

    /// Empirical density (normalized by all pushed samples, including any
    /// that fell outside the range).
    pub fn density(&self) -> Vec<f64> {
        let norm = 1.0 / (self.total as f64 * self.bin_width());
        self.counts.iter().map(|&c| c as f64 * norm).collect()
    }
}

/// Ordinary least squares y = slope x + intercept; returns
/// (slope, intercept, rms residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert!(xs.len() == ys.len() && xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - slope * x - intercept;
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}
