use serde::{Deserialize, Serialize};

use crate::params::RunParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Two-sample KS, judged by its p-value under Bonferroni control.
    KsTwoSample,
    /// One-sample KS against an analytic CDF, Bonferroni-controlled.
    KsOneSample,
    /// Two-sample KS judged by a fixed bound on the distance.
    KsDistanceBound,
    /// A column that is constant on both sides; the constants must agree.
    ConstantEquality,
    /// Weighted vs unweighted mean, judged by a z bound.
    WeightedZ,
    /// A Monte Carlo mean against a closed-form constant, judged by a z bound.
    Calibration,
    /// A deterministic per-replicate identity, judged by a deviation bound.
    ExactCheck,
}

impl TestKind {
    pub fn bonferroni(self) -> bool {
        matches!(self, TestKind::KsTwoSample | TestKind::KsOneSample)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub kind: TestKind,
    /// KS distance, z-score, or scaled deviation depending on `kind`.
    pub statistic: f64,
    pub p_value: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub params: RunParams,
    pub alpha: f64,
    pub tests: Vec<TestResult>,
    pub overall_pass: bool,
    pub elapsed_seconds: f64,
    pub version: String,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &TestResult> {
        self.tests.iter().filter(|t| !t.pass)
    }

    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }
}

/// Bonferroni threshold `alpha / m` over the `m` p-value-judged tests.
pub fn bonferroni_threshold(results: &[TestResult], alpha: f64) -> f64 {
    let m = results.iter().filter(|r| r.kind.bonferroni()).count().max(1);
    alpha / m as f64
}

/// Applies the family-wise threshold to every p-value-judged test and builds
/// the report. Other tests keep the pass flag they were created with.
pub fn aggregate(
    identity: &str,
    params: RunParams,
    mut results: Vec<TestResult>,
    alpha: f64,
    elapsed_seconds: f64,
) -> VerificationReport {
    let threshold = bonferroni_threshold(&results, alpha);
    for r in results.iter_mut().filter(|r| r.kind.bonferroni()) {
        r.pass = r.p_value >= threshold;
    }
    VerificationReport {
        identity: identity.to_owned(),
        params,
        alpha,
        overall_pass: results.iter().all(|r| r.pass),
        tests: results,
        elapsed_seconds,
        version: env!("CARGO_PKG_VERSION").to_owned(),
    }
}
