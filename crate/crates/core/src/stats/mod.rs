//! Distribution-free comparison machinery.

mod ks;
mod report;
mod weighted;

use thiserror::Error;

pub use ks::{effective_n, kolmogorov_tail, ks_one_sample, ks_pvalue, ks_two_sample, Ecdf, P_UNDERFLOW};
pub use report::{aggregate, bonferroni_threshold, TestKind, TestResult, VerificationReport};
pub use weighted::{
    sample_mean, weight_summary, weighted_mean, weighted_mean_compare, MeanEstimate, WeightSummary,
    WeightedComparisonStat,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    Empty,
    #[error("sample contains NaN")]
    NaN,
    #[error("CDF value {value} at {x} is outside [0, 1] or decreasing")]
    BadCdf { x: f64, value: f64 },
    #[error("weights must be finite and nonnegative")]
    NegativeWeight,
    #[error("all weights are zero")]
    ZeroWeights,
    #[error("values and weights differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Two-sided standard normal tail `P(|Z| ≥ z)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        return 0.0;
    }
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}
