//! Empirical CDFs and Kolmogorov–Smirnov statistics.

use super::StatsError;

/// A sorted sample viewed as its empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::Empty);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(StatsError::NaN);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }

    /// `(value, F(value))` for each distinct value, for plotting.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            let f = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 = f,
                _ => out.push((v, f)),
            }
        }
        out
    }
}

fn sorted_copy(xs: &[f64]) -> Result<Vec<f64>, StatsError> {
    Ok(Ecdf::new(xs.to_vec())?.sorted)
}

/// `sup |F_x − F_y|` by a merge scan over both sorted samples. All copies of
/// a tied value are consumed on both sides before the gap is measured.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    let (a, b) = (sorted_copy(xs)?, sorted_copy(ys)?);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// `sup |F_n − F|` against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64, StatsError> {
    let a = sorted_copy(xs)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) || f < prev {
            return Err(StatsError::BadCdf { x, value: f });
        }
        prev = f;
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Effective sample size `nm / (n + m)` of a two-sample comparison.
pub fn effective_n(n: usize, m: usize) -> f64 {
    (n as f64 * m as f64) / (n + m) as f64
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²)`.
///
/// Below `λ = 1` the alternating series converges slowly, so the equivalent
/// Jacobi theta form `1 − (√(2π)/λ) Σ exp(−(2k−1)²π²/(8λ²))` is summed instead.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for k in 1..100 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            sum += term;
            if term < 1e-16 {
                break;
            }
        }
        return (1.0 - (std::f64::consts::TAU).sqrt() / lambda * sum).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// p-values below this are reported as 0.
pub const P_UNDERFLOW: f64 = 1e-12;

/// Asymptotic KS p-value with the Stephens small-sample correction
/// `λ = (√n_e + 0.12 + 0.11/√n_e)·D`.
pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let rn = n_eff.sqrt();
    let p = kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
    if p < P_UNDERFLOW {
        0.0
    } else {
        p
    }
}
