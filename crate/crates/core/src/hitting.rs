//! Random times read off a path: last return to the start value, first time of
//! the global maximum, and the half-local-time time.

use crate::path::{Path, PathError};

/// `sup{s : p(s) = p(0)}`.
pub fn gamma_last_return(p: &Path) -> f64 {
    let level = p.start();
    let segments: Vec<_> = p.segments().collect();
    for seg in segments.into_iter().rev() {
        if seg.vb == level {
            return seg.tb;
        }
        if seg.va == level {
            return seg.ta;
        }
        if (seg.va < level) != (seg.vb < level) {
            return seg.crossing(level);
        }
    }
    0.0
}

/// `inf{s : p(s) = max p}`. The maximum of a PL path sits on a breakpoint.
pub fn sigma_first_argmax(p: &Path) -> f64 {
    let m = p.max_value();
    let k = p.values().iter().position(|&v| v == m).expect("max is attained");
    p.times()[k]
}

/// First time a nondecreasing path reaches half its terminal value; 0 when the
/// terminal value is 0.
pub fn tau_half(lambda: &Path) -> Result<f64, PathError> {
    if let Some(k) = lambda.values().windows(2).position(|w| w[1] < w[0]) {
        return Err(PathError::Decreasing(k));
    }
    let target = 0.5 * lambda.terminal();
    if target <= 0.0 {
        return Ok(0.0);
    }
    let k = lambda.values().iter().position(|&v| v >= target).expect("terminal exceeds half");
    if k == 0 {
        return Ok(0.0);
    }
    let (ta, tb) = (lambda.times()[k - 1], lambda.times()[k]);
    let (va, vb) = (lambda.values()[k - 1], lambda.values()[k]);
    if vb == target {
        return Ok(tb);
    }
    Ok((ta + (target - va) / (vb - va) * (tb - ta)).min(tb))
}
