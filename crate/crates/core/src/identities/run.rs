use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::battery::evaluate;
use super::checks::CHECK_TOL;
use super::{CaseKind, IdentityCase, IdentityId, LocalTimeMethod, NegativeControl};
use crate::hitting::{gamma_last_return, sigma_first_argmax, tau_half};
use crate::occupation::occupation_band;
use crate::params::{Grid, ParamError, RunParams};
use crate::path::{Path, PathError};
use crate::rng::{derive_seed, sample_scalar, ScalarKind, Stream};
use crate::samplers::{
    last_passage, local_time_passage, refine_near_max, sample_bessel3, sample_bessel3_with_future_min, sample_bm,
    sample_bm3, sample_bridge, sample_local_time, sample_meander, sample_meander_conditioned, subdivide_near_zero,
    with_bridge_extremes, SampleError, SegmentLaw, EXTREMES_STREAM, LOCAL_TIME_STREAM, PASSAGE_STREAM, SPLIT_STREAM,
    SUBDIVIDE_STREAM,
};
use crate::stats::{
    sample_mean, weight_summary, weighted_mean_compare, MeanEstimate, StatsError, WeightSummary, WeightedComparisonStat,
};
use crate::transforms::{
    abs_path, capped_suffix_min_minus, combine, l_transform, levy_second_component, negate, pitman, scale, suffix_min,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{id} is a {actual:?} case")]
    WrongKind { id: IdentityId, actual: CaseKind },
    #[error("the functional list is empty")]
    EmptyBattery,
    #[error("{0} replicate produced a non-finite value")]
    NonFinite(&'static str),
}

/// Largest relative deviation seen by a per-replicate deterministic identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub name: String,
    /// Max over replicates of `|actual − expected| / (1 + scale)`.
    pub max_deviation: f64,
    pub replicates: usize,
}

impl ExactCheck {
    pub fn pass(&self) -> bool {
        self.max_deviation <= CHECK_TOL
    }
}

/// Row-major `N × K` functional values for both sides of an identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedFunctionalSamples {
    pub id: IdentityId,
    pub names: Vec<String>,
    pub left: Vec<Vec<f64>>,
    pub right: Vec<Vec<f64>>,
    pub params: RunParams,
    pub exact_checks: Vec<ExactCheck>,
}

impl PairedFunctionalSamples {
    pub fn left_column(&self, j: usize) -> Vec<f64> {
        self.left.iter().map(|r| r[j]).collect()
    }

    pub fn right_column(&self, j: usize) -> Vec<f64> {
        self.right.iter().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedFunctional {
    pub name: String,
    pub stat: WeightedComparisonStat,
}

/// Unnormalized mean weight against its closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub estimate: MeanEstimate,
    pub expected: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedComparison {
    pub id: IdentityId,
    pub params: RunParams,
    pub functionals: Vec<WeightedFunctional>,
    pub weights: WeightSummary,
    pub calibration: Calibration,
    pub n_left: usize,
    pub n_right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

impl Side {
    fn stream(self) -> u64 {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }
}

struct Row {
    values: Vec<f64>,
    deviation: f64,
    weight: f64,
}

impl Row {
    fn plain(values: Vec<f64>) -> Self {
        Self { values, deviation: 0.0, weight: 1.0 }
    }

    fn checked(values: Vec<f64>, deviation: f64) -> Self {
        Self { values, deviation, weight: 1.0 }
    }
}

fn rel(actual: f64, expected: f64, scale: f64) -> f64 {
    (actual - expected).abs() / (1.0 + scale.abs())
}

fn excess(lo: f64, hi: f64, scale: f64) -> f64 {
    (lo - hi).max(0.0) / (1.0 + scale.abs())
}

/// Name of the per-replicate check made on `side`, if any.
fn check_name(case: &IdentityCase, side: Side) -> Option<&'static str> {
    use IdentityId::*;
    match (case.id, side) {
        (ThmPitman3d, Side::Right) if case.control.is_none() => Some("right_second_terminal_equals_b1"),
        (CorPitmanBridge, Side::Left) => Some("left_second_terminal_equals_x"),
        (CorPitmanBridge, Side::Right) => Some("right_second_terminal_equals_x"),
        (CorMeanderCond, Side::Left) => Some("left_terminal_at_least_abs_x"),
        (CorMeanderCond, Side::Right) => Some("right_terminal_at_least_abs_x"),
        (ThmLevy3d, Side::Right) => Some("right_second_terminal_equals_abs_b1"),
        (CorLevyBridge | CorLevyBridgeT, Side::Left) => Some("left_second_terminal_equals_abs_x"),
        (CorLevyBridge | CorLevyBridgeT, Side::Right) => Some("right_second_terminal_equals_abs_x"),
        (LemGlobalInf, Side::Left) => Some("left_future_min_at_most_terminal"),
        (LemRadialTerminal, Side::Right) => Some("right_abs_b1_at_most_terminal"),
        (TauGamma, Side::Right) => Some("right_sigma_at_most_gamma"),
        _ => None,
    }
}

/// Column names produced by `case`.
pub(crate) fn column_names(case: &IdentityCase) -> Vec<String> {
    let battery = || case.functionals.iter().map(|f| f.name().to_owned());
    match case.id {
        IdentityId::TauGamma => vec!["first_time".into(), "gamma".into(), "time_sum".into()],
        IdentityId::SphereDirection => vec!["direction_cosine".into()],
        IdentityId::Absv => vec!["abs_v".into()],
        IdentityId::LemGlobalInf => battery().chain(["future_min_ratio".to_owned()]).collect(),
        _ => battery().collect(),
    }
}

fn constant(grid: &Grid, v: f64) -> Result<Path, PathError> {
    Path::constant(grid.horizon(), v)
}

/// `R − min{suffix_min R, R_t − level}`.
fn levy_right(r: &Path, level: f64) -> Path {
    negate(&capped_suffix_min_minus(r, 1.0, r.terminal() - level))
}

/// `(|β| + λ(β), |β|)` for a bridge to `x`.
fn levy_bridge_left(case: &IdentityCase, grid: &Grid, seed: u64) -> Result<Row, IdentityError> {
    let x = case.params.x;
    let (beta, lambda) = with_local_time(case, sample_bridge(x, grid, seed), seed)?;
    let ab = abs_path(&beta);
    let first = combine(&ab, &lambda, 1.0, 1.0)?;
    let values = evaluate(&case.functionals, &first, &ab)?;
    Ok(Row::checked(values, rel(ab.terminal(), x.abs(), ab.amplitude())))
}

const LINE: SegmentLaw = SegmentLaw::Brownian;
const RADIAL: SegmentLaw = SegmentLaw::Bessel3;
/// Radial segments that come below `NEAR_ZERO·√h` are split `SUBDIVISION` ways.
const NEAR_ZERO: f64 = 3.0;
const SUBDIVISION: usize = 16;
/// Time resolution, relative to `t`, of the refinements locating the argmax
/// and the last zero of a bridge.
const LEAF: f64 = 1.0 / (1u64 << 24) as f64;

fn refine(case: &IdentityCase, p: Path, law: SegmentLaw, seed: u64) -> Path {
    if case.bridge_extremes {
        let p = match law {
            SegmentLaw::Bessel3 => {
                let h = p.horizon() / (p.len() - 1) as f64;
                subdivide_near_zero(&p, NEAR_ZERO * h.sqrt(), SUBDIVISION, derive_seed(seed, SUBDIVIDE_STREAM))
            }
            SegmentLaw::Brownian => p,
        };
        with_bridge_extremes(&p, law, derive_seed(seed, EXTREMES_STREAM))
    } else {
        p
    }
}

/// A sampled one-dimensional path (refined) and its local time at 0.
fn with_local_time(case: &IdentityCase, p: Path, seed: u64) -> Result<(Path, Path), IdentityError> {
    Ok(match case.local_time {
        LocalTimeMethod::Exact => {
            let lambda = sample_local_time(&p, derive_seed(seed, LOCAL_TIME_STREAM));
            (refine(case, p, LINE, seed), lambda)
        }
        LocalTimeMethod::Band => {
            let p = refine(case, p, LINE, seed);
            let lambda = occupation_band(&p, case.params.band_eps)?;
            (p, lambda)
        }
    })
}

fn sample_row(case: &IdentityCase, grid: &Grid, side: Side, seed: u64) -> Result<Row, IdentityError> {
    use IdentityId::*;
    let p = &case.params;
    let fs = &case.functionals;
    let t = grid.horizon();
    let zero = || constant(grid, 0.0);
    let row = match (case.id, side) {
        (ThmPitman3d, Side::Left) => {
            let b = refine(case, sample_bm(grid, seed), LINE, seed);
            Row::plain(evaluate(fs, &pitman(&b), &b)?)
        }
        (ThmPitman3d, Side::Right) => {
            let bd = sample_bm3(grid, seed);
            let r = refine(case, bd.radial(), RADIAL, seed);
            let b1 = bd.component(0).terminal();
            let second = match case.control {
                Some(NegativeControl::DropTerminalCap) => combine(&scale(&suffix_min(&r), 2.0), &r, 1.0, -1.0)?,
                _ => l_transform(&r, b1)?,
            };
            let dev = rel(second.terminal(), b1, r.amplitude());
            Row::checked(evaluate(fs, &r, &second)?, dev)
        }
        (CorPitmanBridge, Side::Left) => {
            let x = match case.control {
                Some(NegativeControl::ShiftBridgeEndpoint(shift)) => p.x + shift,
                _ => p.x,
            };
            let beta = refine(case, sample_bridge(x, grid, seed), LINE, seed);
            Row::checked(evaluate(fs, &pitman(&beta), &beta)?, rel(beta.terminal(), x, x))
        }
        (CorPitmanBridge, Side::Right) => {
            let m = refine(case, sample_meander(p.x, grid, seed), RADIAL, seed);
            let second = l_transform(&m, p.x)?;
            let dev = rel(second.terminal(), p.x, m.amplitude());
            Row::checked(evaluate(fs, &m, &second)?, dev)
        }
        (CorMeanderCond, _) => {
            let m = match side {
                Side::Left => sample_meander(p.x, grid, seed),
                Side::Right => sample_meander_conditioned(p.x.abs(), grid, seed, case.max_tries)?,
            };
            let m = refine(case, m, RADIAL, seed);
            let dev = excess(p.x.abs(), m.terminal(), p.x);
            Row::checked(evaluate(fs, &m, &zero()?)?, dev)
        }
        (ThmLevy3d, Side::Left) => {
            let (b, lambda) = with_local_time(case, sample_bm(grid, seed), seed)?;
            let ab = abs_path(&b);
            let first = combine(&ab, &lambda, 1.0, 1.0)?;
            Row::plain(evaluate(fs, &first, &ab)?)
        }
        (ThmLevy3d, Side::Right) => {
            let bd = sample_bm3(grid, seed);
            let r = refine(case, bd.radial(), RADIAL, seed);
            let b1 = bd.component(0).terminal().abs();
            let second = levy_right(&r, b1);
            let dev = rel(second.terminal(), b1, r.amplitude());
            Row::checked(evaluate(fs, &r, &second)?, dev)
        }
        (CorLevyBridge | CorLevyBridgeT, Side::Left) => levy_bridge_left(case, grid, seed)?,
        (CorLevyBridge, Side::Right) => {
            let m = refine(case, sample_meander(p.x, grid, seed), RADIAL, seed);
            let second = levy_right(&m, p.x.abs());
            let dev = rel(second.terminal(), p.x.abs(), m.amplitude());
            Row::checked(evaluate(fs, &m, &second)?, dev)
        }
        (CorLevyBridgeT, Side::Right) => {
            let beta = refine(case, sample_bridge(-p.x.abs(), grid, seed), LINE, seed);
            let second = levy_second_component(&beta);
            let dev = rel(second.terminal(), p.x.abs(), beta.amplitude());
            Row::checked(evaluate(fs, &pitman(&beta), &second)?, dev)
        }
        (LemGlobalInf, Side::Left) => {
            let (r, future_min) = sample_bessel3_with_future_min(grid, p.trunc_factor, seed);
            let r = refine(case, r, RADIAL, seed);
            let rt = r.terminal();
            let mut values = evaluate(fs, &r, &constant(grid, future_min)?)?;
            values.push(if rt > 0.0 { future_min / rt } else { 0.0 });
            Row::checked(values, excess(future_min, rt, rt))
        }
        (LemGlobalInf, Side::Right) => {
            let r = refine(case, sample_bessel3(grid, seed), RADIAL, seed);
            let u = sample_scalar(ScalarKind::Uniform01, derive_seed(seed, 3)).value;
            let mut values = evaluate(fs, &r, &constant(grid, u * r.terminal())?)?;
            values.push(u);
            Row::plain(values)
        }
        (LemRadialTerminal, Side::Left) => {
            let r = refine(case, sample_bessel3(grid, seed), RADIAL, seed);
            let v = sample_scalar(ScalarKind::VUniformSym, derive_seed(seed, 3)).value;
            Row::plain(evaluate(fs, &r, &constant(grid, v * r.terminal())?)?)
        }
        (LemRadialTerminal, Side::Right) => {
            let bd = sample_bm3(grid, seed);
            let r = refine(case, bd.radial(), RADIAL, seed);
            let b1 = bd.component(0).terminal();
            let dev = excess(b1.abs(), r.terminal(), r.terminal());
            Row::checked(evaluate(fs, &r, &constant(grid, b1)?)?, dev)
        }
        (TauGamma, Side::Left) => {
            let raw = sample_bridge(p.x, grid, seed);
            let (beta, lambda) = with_local_time(case, raw.clone(), seed)?;
            let tau = match case.local_time {
                LocalTimeMethod::Exact => {
                    local_time_passage(&raw, &lambda, 0.5 * lambda.terminal(), derive_seed(seed, SPLIT_STREAM))
                        .expect("local time reaches half its terminal value")
                }
                LocalTimeMethod::Band => tau_half(&lambda)?,
            };
            let gamma = if case.bridge_extremes {
                last_passage(&raw, 0.0, LEAF * t, derive_seed(seed, PASSAGE_STREAM))
            } else {
                gamma_last_return(&beta)
            };
            Row::plain(vec![tau, gamma, tau + gamma])
        }
        (TauGamma, Side::Right) => {
            let raw = sample_bridge(-p.x.abs(), grid, seed);
            let (sigma, gamma) = if case.bridge_extremes {
                let fine = refine_near_max(&raw, LEAF * t, derive_seed(seed, SPLIT_STREAM));
                (sigma_first_argmax(&fine), last_passage(&fine, 0.0, LEAF * t, derive_seed(seed, PASSAGE_STREAM)))
            } else {
                (sigma_first_argmax(&raw), gamma_last_return(&raw))
            };
            Row::checked(vec![sigma, gamma, sigma + gamma], excess(sigma, gamma, t))
        }
        (SphereDirection, Side::Left) => {
            let mut s = Stream::new(seed);
            let n = [s.box_muller(), s.box_muller(), s.box_muller()];
            let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
            Row::plain(vec![if norm > 0.0 { n[0] / norm } else { 0.0 }])
        }
        (SphereDirection, Side::Right) => Row::plain(vec![sample_scalar(ScalarKind::VUniformSym, seed).value]),
        (Absv, Side::Left) => Row::plain(vec![sample_scalar(ScalarKind::VUniformSym, seed).value.abs()]),
        (Absv, Side::Right) => Row::plain(vec![sample_scalar(ScalarKind::Uniform01, seed).value]),
        (Imhof, Side::Left) => {
            let m = refine(case, sample_meander(0.0, grid, seed), RADIAL, seed);
            Row::plain(evaluate(fs, &m, &zero()?)?)
        }
        (Rce, Side::Left) => {
            let beta = refine(case, sample_bridge(p.x, grid, seed), LINE, seed);
            Row::plain(evaluate(fs, &pitman(&beta), &zero()?)?)
        }
        (Imhof | Rce, Side::Right) => {
            let r = refine(case, sample_bessel3(grid, seed), RADIAL, seed);
            let rt = r.terminal();
            let weight = match case.id {
                Imhof => (std::f64::consts::PI * t / 2.0).sqrt() / rt,
                _ if rt >= p.x.abs() => 0.5 / rt,
                _ => 0.0,
            };
            Row { values: evaluate(fs, &r, &zero()?)?, deviation: 0.0, weight }
        }
    };
    if row.values.iter().any(|v| !v.is_finite()) || !row.weight.is_finite() {
        return Err(IdentityError::NonFinite(match side {
            Side::Left => "a left",
            Side::Right => "a right",
        }));
    }
    Ok(row)
}

/// Replicate `i` of `side` uses seed `derive_seed(derive_seed(seed, side), i)`.
fn run_side(case: &IdentityCase, grid: &Grid, side: Side) -> Result<Vec<Row>, IdentityError> {
    let base = derive_seed(case.params.seed, side.stream());
    (0..case.params.replicates as u64)
        .into_par_iter()
        .map(|i| sample_row(case, grid, side, derive_seed(base, i)))
        .collect()
}

fn prepare(case: &IdentityCase, weighted: bool) -> Result<Grid, IdentityError> {
    let kind = case.kind();
    if (kind == CaseKind::Weighted) != weighted {
        return Err(IdentityError::WrongKind { id: case.id, actual: kind });
    }
    if kind != CaseKind::ScalarTwoSample && case.functionals.is_empty() {
        return Err(IdentityError::EmptyBattery);
    }
    case.params.validate()?;
    Ok(case.params.grid()?)
}

/// Samples both sides of a two-sample identity.
pub fn run_identity(case: &IdentityCase) -> Result<PairedFunctionalSamples, IdentityError> {
    let grid = prepare(case, false)?;
    let mut exact_checks = Vec::new();
    let mut sides = Vec::with_capacity(2);
    for side in [Side::Left, Side::Right] {
        let rows = run_side(case, &grid, side)?;
        if let Some(name) = check_name(case, side) {
            exact_checks.push(ExactCheck {
                name: name.to_owned(),
                max_deviation: rows.iter().map(|r| r.deviation).fold(0.0, f64::max),
                replicates: rows.len(),
            });
        }
        sides.push(rows.into_iter().map(|r| r.values).collect::<Vec<_>>());
    }
    let right = sides.pop().expect("two sides");
    let left = sides.pop().expect("two sides");
    Ok(PairedFunctionalSamples {
        id: case.id,
        names: column_names(case),
        left,
        right,
        params: case.params,
        exact_checks,
    })
}

/// Closed form of the mean weight on the right side.
pub(crate) fn expected_mean_weight(case: &IdentityCase) -> f64 {
    match case.id {
        IdentityId::Rce => {
            let (t, x) = (case.params.t, case.params.x);
            (-x * x / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt()
        }
        _ => 1.0,
    }
}

/// Plain battery means on the left against self-normalized weighted means on
/// the right, plus the mean-weight calibration.
pub fn run_weighted_identity(case: &IdentityCase) -> Result<WeightedComparison, IdentityError> {
    let grid = prepare(case, true)?;
    let left = run_side(case, &grid, Side::Left)?;
    let right = run_side(case, &grid, Side::Right)?;
    let weights: Vec<f64> = right.iter().map(|r| r.weight).collect();
    let summary = weight_summary(&weights)?;

    let mut functionals = Vec::with_capacity(case.functionals.len());
    for (j, f) in case.functionals.iter().enumerate() {
        let l: Vec<f64> = left.iter().map(|r| r.values[j]).collect();
        let r: Vec<f64> = right.iter().map(|r| r.values[j]).collect();
        functionals
            .push(WeightedFunctional { name: f.name().to_owned(), stat: weighted_mean_compare(&l, &r, &weights)? });
    }

    let estimate = sample_mean(&weights)?;
    let expected = expected_mean_weight(case);
    let diff = (estimate.mean - expected).abs();
    let z = if estimate.se > 0.0 {
        diff / estimate.se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(WeightedComparison {
        id: case.id,
        params: case.params,
        functionals,
        weights: summary,
        calibration: Calibration { estimate, expected, z },
        n_left: left.len(),
        n_right: right.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::Functional;

    fn small(id: IdentityId, x: f64) -> IdentityCase {
        let params = RunParams { x, n_steps: 64, replicates: 200, ..RunParams::default() }.with_default_band();
        IdentityCase::new(id, params)
    }

    #[test]
    fn every_case_runs_with_consistent_shapes() {
        for id in IdentityId::ALL {
            let case = small(id, 0.8);
            match id.kind() {
                CaseKind::Weighted => {
                    let w = run_weighted_identity(&case).unwrap();
                    assert_eq!(w.functionals.len(), 8);
                    assert!(w.weights.effective_sample_size > 0.0);
                    assert!(w.weights.min >= 0.0);
                }
                _ => {
                    let s = run_identity(&case).unwrap();
                    assert_eq!(s.left.len(), 200);
                    assert_eq!(s.right.len(), 200);
                    assert!(s.left.iter().chain(&s.right).all(|r| r.len() == s.names.len()));
                    for c in &s.exact_checks {
                        assert!(c.pass(), "{id}: {c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        assert!(matches!(run_identity(&small(IdentityId::Imhof, 0.0)), Err(IdentityError::WrongKind { .. })));
        assert!(matches!(run_weighted_identity(&small(IdentityId::Absv, 0.0)), Err(IdentityError::WrongKind { .. })));
    }

    #[test]
    fn sides_are_independent_streams() {
        let s = run_identity(&small(IdentityId::Absv, 0.0)).unwrap();
        let l = s.left_column(0);
        let r = s.right_column(0);
        assert!(l.iter().zip(&r).all(|(a, b)| a != b));
    }

    #[test]
    fn functional_override() {
        let mut case = small(IdentityId::ThmPitman3d, 0.0);
        case.functionals = vec![Functional::SecondMax, Functional::FirstTerminal];
        let s = run_identity(&case).unwrap();
        assert_eq!(s.names, ["second_max", "first_terminal"]);
        case.functionals.clear();
        assert_eq!(run_identity(&case), Err(IdentityError::EmptyBattery));
    }

    #[test]
    fn rejection_budget_surfaces() {
        let mut case = small(IdentityId::CorMeanderCond, 50.0);
        case.max_tries = 3;
        assert!(matches!(run_identity(&case), Err(IdentityError::Sample(SampleError::RejectionExhausted { .. }))));
    }

    #[test]
    fn band_local_time_is_selectable() {
        for id in [IdentityId::ThmLevy3d, IdentityId::CorLevyBridgeT, IdentityId::TauGamma] {
            let mut case = small(id, -0.7);
            let exact = run_identity(&case).unwrap();
            case.local_time = super::super::LocalTimeMethod::Band;
            let band = run_identity(&case).unwrap();
            assert_eq!(exact.right, band.right, "{id}");
            assert_ne!(exact.left, band.left, "{id}");
        }
    }

    #[test]
    fn terminal_columns_are_exact_constants() {
        let s = run_identity(&small(IdentityId::CorPitmanBridge, 0.8)).unwrap();
        let j = s.column_index("second_quarter_mix").unwrap();
        assert!(s.left_column(j).iter().all(|v| v.is_finite()));
        assert!(s.exact_checks.iter().all(|c| c.pass()));
    }
}
