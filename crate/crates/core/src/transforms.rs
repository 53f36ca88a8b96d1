//! Exact piecewise-linear algebra: running extrema, pointwise min/max, and the
//! Pitman and `L_y` transforms.
//!
//! Every operation returns the exact PL representation of its result. Where a
//! result has a kink strictly inside an input segment (a segment crossing a
//! running extremum, two paths crossing, a zero crossing) that time is inserted
//! as a new breakpoint.

use crate::path::{interpolate, Path, PathBuilder, PathError, Segment};

/// `s ↦ max_{0≤u≤s} p(u)`.
pub fn prefix_max(p: &Path) -> Path {
    let mut out = PathBuilder::with_capacity(p.horizon(), p.len() + 8);
    let mut m = p.start();
    out.push(0.0, m);
    for seg in p.segments() {
        if seg.vb > m {
            if seg.va < m {
                out.push_interior(seg.crossing(m), m, seg.tb);
            }
            m = seg.vb;
        }
        out.push(seg.tb, m);
    }
    out.finish()
}

/// Backward scan for the running max over `[s, t]` of `sign·p`. Returns, in
/// decreasing time order, the breakpoint times, the envelope of `sign·p`, and
/// `p` itself on those times. A crossing point lies on the segment at the
/// envelope level, so `p` there is known exactly.
fn suffix_envelope_rev(p: &Path, sign: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (times, values) = (p.times(), p.values());
    let n = times.len();
    let tol = p.time_tol();
    let mut ts = Vec::with_capacity(n + 8);
    let mut env = Vec::with_capacity(n + 8);
    let mut pv = Vec::with_capacity(n + 8);
    let mut m = sign * values[n - 1];
    ts.push(times[n - 1]);
    env.push(m);
    pv.push(values[n - 1]);
    for k in (0..n - 1).rev() {
        let seg = Segment { ta: times[k], tb: times[k + 1], va: sign * values[k], vb: sign * values[k + 1] };
        if seg.va > m {
            if seg.vb < m {
                let u = seg.crossing(m);
                let last = ts[ts.len() - 1];
                if u < last - tol && u > seg.ta + tol {
                    ts.push(u);
                    env.push(m);
                    pv.push(sign * m);
                }
            }
            m = seg.va;
        }
        ts.push(seg.ta);
        env.push(m);
        pv.push(values[k]);
    }
    (ts, env, pv)
}

/// `s ↦ max_{s≤u≤t} p(u)`.
pub fn suffix_max(p: &Path) -> Path {
    let (mut ts, mut env, _) = suffix_envelope_rev(p, 1.0);
    ts.reverse();
    env.reverse();
    Path::from_parts(ts, env)
}

/// `s ↦ min_{s≤u≤t} p(u)`.
pub fn suffix_min(p: &Path) -> Path {
    let (mut ts, env, _) = suffix_envelope_rev(p, -1.0);
    ts.reverse();
    Path::from_parts(ts, env.into_iter().rev().map(|v| -v).collect())
}

/// `s ↦ min{factor·min_{s≤u≤t} p(u), cap} − p(s)` in one backward and one
/// forward pass.
pub(crate) fn capped_suffix_min_minus(p: &Path, factor: f64, cap: f64) -> Path {
    let (ts, env, pv) = suffix_envelope_rev(p, -1.0);
    let n = ts.len();
    let mut out = PathBuilder::with_capacity(p.horizon(), n + 8);
    // walk the reversed arrays from the end, i.e. forward in time
    let mut fa = -factor * env[n - 1];
    out.push(0.0, fa.min(cap) - pv[n - 1]);
    for k in (0..n - 1).rev() {
        let (ta, tb) = (ts[k + 1], ts[k]);
        let fb = -factor * env[k];
        let (da, db) = (fa - cap, fb - cap);
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let u = ta + da / (da - db) * (tb - ta);
            out.push_interior(u, cap - interpolate(ta, pv[k + 1], tb, pv[k], u), tb);
        }
        out.push(tb, fb.min(cap) - pv[k]);
        fa = fb;
    }
    out.finish()
}

/// `s ↦ min_{0≤u≤s} p(u)`.
pub fn prefix_min(p: &Path) -> Path {
    negate(&prefix_max(&negate(p)))
}

pub fn negate(p: &Path) -> Path {
    Path::from_parts(p.times().to_vec(), p.values().iter().map(|v| -v).collect())
}

/// `s ↦ a·p(s) + slope·s + c` on the breakpoints of `p`.
pub fn affine(p: &Path, a: f64, slope: f64, c: f64) -> Result<Path, PathError> {
    if !(a.is_finite() && slope.is_finite() && c.is_finite()) {
        return Err(PathError::NonFiniteCoefficient);
    }
    let values: Vec<f64> = p.times().iter().zip(p.values()).map(|(&s, &v)| a * v + slope * s + c).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(PathError::NonFinite(i));
    }
    Ok(Path::from_parts(p.times().to_vec(), values))
}

pub(crate) fn scale(p: &Path, a: f64) -> Path {
    Path::from_parts(p.times().to_vec(), p.values().iter().map(|v| a * v).collect())
}

fn check_horizons(p: &Path, q: &Path) -> Result<(), PathError> {
    if (p.horizon() - q.horizon()).abs() > p.time_tol() {
        return Err(PathError::HorizonMismatch(p.horizon(), q.horizon()));
    }
    Ok(())
}

/// Both paths evaluated on the union of their breakpoints.
struct Merged {
    times: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

fn merge(p: &Path, q: &Path) -> Merged {
    let (pt, pv, qt, qv) = (p.times(), p.values(), q.times(), q.values());
    let tol = p.time_tol();
    let cap = pt.len() + qt.len();
    if pt == qt {
        return Merged { times: pt.to_vec(), p: pv.to_vec(), q: qv.to_vec() };
    }
    let mut m = Merged { times: Vec::with_capacity(cap), p: Vec::with_capacity(cap), q: Vec::with_capacity(cap) };
    let (mut i, mut j) = (0, 0);
    while i < pt.len() && j < qt.len() {
        let (tp, tq) = (pt[i], qt[j]);
        if (tp - tq).abs() <= tol {
            m.times.push(tp);
            m.p.push(pv[i]);
            m.q.push(qv[j]);
            i += 1;
            j += 1;
        } else if tp < tq {
            m.times.push(tp);
            m.p.push(pv[i]);
            m.q.push(interpolate(qt[j - 1], qv[j - 1], tq, qv[j], tp));
            i += 1;
        } else {
            m.times.push(tq);
            m.p.push(interpolate(pt[i - 1], pv[i - 1], tp, pv[i], tq));
            m.q.push(qv[j]);
            j += 1;
        }
    }
    // horizons agree within tolerance, so both cursors finish together
    debug_assert!(i == pt.len() && j == qt.len());
    m
}

/// `a·p + b·q`. Linear combinations introduce no new kinks.
pub fn combine(p: &Path, q: &Path, a: f64, b: f64) -> Result<Path, PathError> {
    check_horizons(p, q)?;
    let m = merge(p, q);
    let values = m.p.iter().zip(&m.q).map(|(x, y)| a * x + b * y).collect();
    Ok(Path::from_parts(m.times, values))
}

pub fn pointwise_min(p: &Path, q: &Path) -> Result<Path, PathError> {
    check_horizons(p, q)?;
    let m = merge(p, q);
    let mut out = PathBuilder::with_capacity(p.horizon(), m.times.len() + 8);
    out.push(0.0, m.p[0].min(m.q[0]));
    for k in 1..m.times.len() {
        let (ta, tb) = (m.times[k - 1], m.times[k]);
        let da = m.p[k - 1] - m.q[k - 1];
        let db = m.p[k] - m.q[k];
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let u = ta + da / (da - db) * (tb - ta);
            let v = interpolate(ta, m.p[k - 1], tb, m.p[k], u);
            out.push_interior(u, v, tb);
        }
        out.push(tb, m.p[k].min(m.q[k]));
    }
    Ok(out.finish())
}

pub fn pointwise_max(p: &Path, q: &Path) -> Result<Path, PathError> {
    Ok(negate(&pointwise_min(&negate(p), &negate(q))?))
}

/// `max(p, 0)` with zero crossings inserted.
pub fn positive_part(p: &Path) -> Path {
    let mut out = PathBuilder::with_capacity(p.horizon(), p.len() + 8);
    out.push(0.0, p.start().max(0.0));
    for seg in p.segments() {
        if (seg.va < 0.0 && seg.vb > 0.0) || (seg.va > 0.0 && seg.vb < 0.0) {
            out.push_interior(seg.crossing(0.0), 0.0, seg.tb);
        }
        out.push(seg.tb, seg.vb.max(0.0));
    }
    out.finish()
}

pub fn abs_path(p: &Path) -> Path {
    let mut out = PathBuilder::with_capacity(p.horizon(), p.len() + 8);
    out.push(0.0, p.start().abs());
    for seg in p.segments() {
        if (seg.va < 0.0 && seg.vb > 0.0) || (seg.va > 0.0 && seg.vb < 0.0) {
            out.push_interior(seg.crossing(0.0), 0.0, seg.tb);
        }
        out.push(seg.tb, seg.vb.abs());
    }
    out.finish()
}

/// Pitman transform `P(p)(s) = 2·max_{0≤u≤s} p(u) − p(s)`.
pub fn pitman(p: &Path) -> Path {
    let mut out = PathBuilder::with_capacity(p.horizon(), p.len() + 8);
    let mut m = p.start();
    out.push(0.0, m);
    for seg in p.segments() {
        if seg.vb > m {
            if seg.va < m {
                // p meets its running max here, so P = 2m − m
                out.push_interior(seg.crossing(m), m, seg.tb);
            }
            m = seg.vb;
        }
        out.push(seg.tb, 2.0 * m - seg.vb);
    }
    out.finish()
}

/// `L_y(p)(s) = −p(s) + min{2·min_{s≤u≤t} p(u), p(t) + y}`.
///
/// `L_{p(t)}` inverts [`pitman`]: `l_transform(&pitman(p), p.terminal())`
/// reproduces `p`.
pub fn l_transform(p: &Path, y: f64) -> Result<Path, PathError> {
    if !y.is_finite() {
        return Err(PathError::NonFiniteCoefficient);
    }
    Ok(capped_suffix_min_minus(p, 2.0, p.terminal() + y))
}

/// `min{max_{0≤u≤s} p(u), (max_{s≤u≤t} p(u))₊} − p(s)`.
pub fn levy_second_component(p: &Path) -> Path {
    let clipped = positive_part(&suffix_max(p));
    let inner = pointwise_min(&prefix_max(p), &clipped).expect("same horizon");
    combine(&inner, p, 1.0, -1.0).expect("same horizon")
}
