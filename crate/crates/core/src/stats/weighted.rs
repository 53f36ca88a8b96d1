//! Comparison of a plain Monte Carlo mean against a self-normalized
//! importance-weighted mean.

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Mean and standard error of one side of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
}

/// Plain sample mean with SE `s/√n` (`s` the unbiased sample deviation; 0 for
/// a single value).
pub fn sample_mean(xs: &[f64]) -> Result<MeanEstimate, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::Empty);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok(MeanEstimate { mean, se: 0.0 });
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(MeanEstimate { mean, se: (var / n).sqrt() })
}

/// Ratio estimator `Σw·f / Σw` with the delta-method SE
/// `sqrt(Σ w²(f − r)²) / Σw`.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<MeanEstimate, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.len() != weights.len() {
        return Err(StatsError::LengthMismatch(values.len(), weights.len()));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(StatsError::NegativeWeight);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(StatsError::ZeroWeights);
    }
    let r = values.iter().zip(weights).map(|(f, w)| w * f).sum::<f64>() / total;
    let s2 = values.iter().zip(weights).map(|(f, w)| (w * (f - r)).powi(2)).sum::<f64>();
    Ok(MeanEstimate { mean: r, se: s2.sqrt() / total })
}

/// Extremes and Kish effective sample size `(Σw)²/Σw²` of a weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub min: f64,
    pub max: f64,
    pub effective_sample_size: f64,
}

pub fn weight_summary(weights: &[f64]) -> Result<WeightSummary, StatsError> {
    let total: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    if total <= 0.0 {
        return Err(StatsError::ZeroWeights);
    }
    Ok(WeightSummary {
        min: weights.iter().copied().fold(f64::INFINITY, f64::min),
        max: weights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        effective_sample_size: total * total / sq,
    })
}

/// Outcome of [`weighted_mean_compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedComparisonStat {
    pub left: MeanEstimate,
    pub right: MeanEstimate,
    /// `|left − right| / sqrt(se_l² + se_r²)`; infinite when both SEs vanish
    /// and the means differ, 0 when they agree.
    pub z: f64,
}

impl WeightedComparisonStat {
    pub fn degenerate(&self) -> bool {
        self.left.se == 0.0 && self.right.se == 0.0
    }
}

pub fn weighted_mean_compare(
    left: &[f64],
    right: &[f64],
    weights: &[f64],
) -> Result<WeightedComparisonStat, StatsError> {
    let l = sample_mean(left)?;
    let r = weighted_mean(right, weights)?;
    let diff = (l.mean - r.mean).abs();
    let se = (l.se * l.se + r.se * r.se).sqrt();
    let z = if se > 0.0 {
        diff / se
    } else if diff <= 1e-12 * (1.0 + l.mean.abs()) {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(WeightedComparisonStat { left: l, right: r, z })
}
