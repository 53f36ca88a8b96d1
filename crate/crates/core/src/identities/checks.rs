//! Deterministic identities between path transforms, checked on the exact PL
//! representation.
//!
//! Each checker builds both sides as PL paths and returns the sup of their
//! difference. The difference of two PL paths is PL, so its sup is attained
//! on the union of their breakpoints and the returned value is exact up to
//! rounding.

use thiserror::Error;

use crate::hitting::{gamma_last_return, sigma_first_argmax};
use crate::path::Path;
use crate::transforms::{
    combine, l_transform, pitman, pointwise_min, positive_part, prefix_max, suffix_max, suffix_min,
};

/// Relative tolerance of the checkers: pass when the deviation is at most
/// `CHECK_TOL · (1 + amplitude)`.
pub const CHECK_TOL: f64 = 1e-9;

pub fn tolerance(p: &Path) -> f64 {
    CHECK_TOL * (1.0 + p.amplitude())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error("path must start at 0, starts at {0}")]
    NonZeroStart(f64),
    #[error("path must end at or below 0, ends at {0}")]
    PositiveEnd(f64),
}

/// `sup_s |a(s) − b(s)|`.
pub fn sup_distance(a: &Path, b: &Path) -> f64 {
    combine(a, b, 1.0, -1.0).expect("checkers compare paths on one horizon").amplitude()
}

/// `min_{s≤u≤t} P(p)(u) = 2·max_{[0,s]} p − min{max_{[0,s]} p, max_{[s,t]} p}`.
pub fn check_lpit(p: &Path) -> f64 {
    let lhs = suffix_min(&pitman(p));
    let a = prefix_max(p);
    let b = suffix_max(p);
    let rhs = combine(&a, &pointwise_min(&a, &b).expect("same horizon"), 2.0, -1.0).expect("same horizon");
    sup_distance(&lhs, &rhs)
}

/// `L_{p(t)}(P(p)) = p`.
pub fn check_inverse(p: &Path) -> f64 {
    let back = l_transform(&pitman(p), p.terminal()).expect("finite terminal value");
    sup_distance(&back, p)
}

fn bridge_to_nonpositive(p: &Path) -> Result<(), CheckError> {
    if p.start() != 0.0 {
        return Err(CheckError::NonZeroStart(p.start()));
    }
    if p.terminal() > 0.0 {
        return Err(CheckError::PositiveEnd(p.terminal()));
    }
    Ok(())
}

/// For `p(0) = 0`, `p(t) = −|x|`:
/// `2·max_{[0,s]} p − min{min_{[s,t]} P(p), P(p)(t) − |x|} = min{max_{[0,s]} p, (max_{[s,t]} p)₊}`.
pub fn check_suff(p: &Path) -> Result<f64, CheckError> {
    bridge_to_nonpositive(p)?;
    let x_abs = -p.terminal();
    let pp = pitman(p);
    let cap = Path::constant(p.horizon(), pp.terminal() - x_abs).expect("positive horizon");
    let a = prefix_max(p);
    let lhs =
        combine(&a, &pointwise_min(&suffix_min(&pp), &cap).expect("same horizon"), 2.0, -1.0).expect("same horizon");
    let rhs = pointwise_min(&a, &positive_part(&suffix_max(p))).expect("same horizon");
    Ok(sup_distance(&lhs, &rhs))
}

/// For `p(0) = 0`, `p(t) ≤ 0`: `(max_{[s,t]} p)₊` equals the global max on
/// `[0, σ]`, the suffix max on `[σ, γ]`, and 0 on `[γ, t]`.
pub fn check_piecewise(p: &Path) -> Result<f64, CheckError> {
    bridge_to_nonpositive(p)?;
    let sigma = sigma_first_argmax(p);
    let gamma = gamma_last_return(p);
    let global = p.max_value();
    let smax = suffix_max(p);
    let clipped = positive_part(&smax);

    let mut times: Vec<f64> = clipped.times().iter().chain(smax.times()).copied().collect();
    times.extend([sigma, gamma]);
    let mut dev: f64 = 0.0;
    for s in times {
        let actual = clipped.eval_unchecked(s);
        if s <= sigma {
            dev = dev.max((actual - global).abs());
        }
        if sigma <= s && s <= gamma {
            dev = dev.max((actual - smax.eval_unchecked(s)).abs());
        }
        if s >= gamma {
            dev = dev.max(actual.abs());
        }
    }
    Ok(dev)
}
