//! Occupation-time estimators of the local time at 0.

use crate::path::{Path, PathBuilder, PathError};

/// `s ↦ (1/2ε)·|{u ≤ s : |p(u)| < ε}|`, computed exactly on each segment.
///
/// Band entry and exit times are inserted as breakpoints so the result is the
/// exact PL cumulative occupation. A flat segment counts only when strictly
/// inside the open band.
pub fn occupation_band(p: &Path, eps: f64) -> Result<Path, PathError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(PathError::BadBand(eps));
    }
    let scale = 0.5 / eps;
    let mut out = PathBuilder::with_capacity(p.horizon(), p.len() + 8);
    let mut cum = 0.0;
    out.push(0.0, 0.0);
    for seg in p.segments() {
        let dt = seg.tb - seg.ta;
        if seg.va == seg.vb {
            if seg.va.abs() < eps {
                cum += dt * scale;
            }
            out.push(seg.tb, cum);
            continue;
        }
        let (lo, hi) = if seg.va < seg.vb { (seg.va, seg.vb) } else { (seg.vb, seg.va) };
        let (a, b) = (lo.max(-eps), hi.min(eps));
        if a < b {
            let (ua, ub) = {
                let (x, y) = (seg.crossing(a), seg.crossing(b));
                let (x, y) = if x <= y { (x, y) } else { (y, x) };
                (x.max(seg.ta), y.min(seg.tb))
            };
            out.push_interior(ua, cum, seg.tb);
            cum += (b - a) / (hi - lo) * dt * scale;
            out.push_interior(ub, cum, seg.tb);
        }
        out.push(seg.tb, cum);
    }
    Ok(out.finish())
}

/// Right-continuous nondecreasing step function on `[0, t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    horizon: f64,
    jumps: Vec<(f64, f64)>,
}

impl StepPath {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `(time, size)` pairs in time order.
    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.jumps.iter().take_while(|(u, _)| *u <= s).map(|(_, h)| h).sum()
    }

    pub fn terminal(&self) -> f64 {
        self.jumps.iter().map(|(_, h)| h).sum()
    }
}

/// The `ε ↓ 0` limit of [`occupation_band`] for a PL path.
///
/// A segment crossing 0 contributes `duration / |increment|` at the crossing
/// time; a segment touching 0 only at an endpoint contributes half that.
/// Segments identically 0 have no finite limit and are rejected.
pub fn occupation_density_zero(p: &Path) -> Result<StepPath, PathError> {
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    let mut add = |u: f64, h: f64| match jumps.last_mut() {
        Some((last, acc)) if *last == u => *acc += h,
        _ => jumps.push((u, h)),
    };
    for (k, seg) in p.segments().enumerate() {
        if seg.va == 0.0 && seg.vb == 0.0 {
            return Err(PathError::FlatAtZero(k));
        }
        let rate = (seg.tb - seg.ta) / (seg.vb - seg.va).abs();
        if seg.va == 0.0 {
            add(seg.ta, 0.5 * rate);
        } else if seg.vb == 0.0 {
            add(seg.tb, 0.5 * rate);
        } else if (seg.va < 0.0) != (seg.vb < 0.0) {
            add(seg.crossing(0.0), rate);
        }
    }
    Ok(StepPath { horizon: p.horizon(), jumps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::negate;

    #[test]
    fn band_on_zero_path() {
        let zero = Path::constant(1.0, 0.0).unwrap();
        let lam = occupation_band(&zero, 0.25).unwrap();
        assert_eq!(lam.eval(0.5).unwrap(), 1.0);
        assert_eq!(lam.terminal(), 2.0);
    }

    #[test]
    fn band_on_line() {
        let line = Path::uniform(1.0, vec![0.0, 1.0]).unwrap();
        let lam = occupation_band(&line, 0.5).unwrap();
        assert!((lam.terminal() - 0.5).abs() < 1e-15);
        // exit time inserted
        assert!(lam.times().iter().any(|&t| (t - 0.5).abs() < 1e-15));
        assert!((lam.eval(0.25).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn band_never_entered() {
        let p = Path::uniform(1.0, vec![0.3, 2.0, 0.5]).unwrap();
        assert!(occupation_band(&p, 0.3).unwrap().values().iter().all(|&v| v == 0.0));
        // flat at the band edge is excluded (open band)
        let edge = Path::constant(1.0, 0.3).unwrap();
        assert_eq!(occupation_band(&edge, 0.3).unwrap().terminal(), 0.0);
    }

    #[test]
    fn band_rejects_bad_eps() {
        let p = Path::constant(1.0, 0.0).unwrap();
        assert_eq!(occupation_band(&p, 0.0), Err(PathError::BadBand(0.0)));
        assert!(occupation_band(&p, -1.0).is_err());
    }

    #[test]
    fn band_is_symmetric_and_monotone() {
        let p = Path::uniform(2.0, vec![0.0, 0.3, -0.2, 0.05, 1.0, -0.01]).unwrap();
        let a = occupation_band(&p, 0.1).unwrap();
        let b = occupation_band(&negate(&p), 0.1).unwrap();
        for &s in p.times() {
            assert_eq!(a.eval(s).unwrap(), b.eval(s).unwrap());
        }
        assert!(a.values().windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(a.start(), 0.0);
    }

    #[test]
    fn density_examples() {
        let line = Path::uniform(1.0, vec![-1.0, 1.0]).unwrap();
        let d = occupation_density_zero(&line).unwrap();
        assert_eq!(d.terminal(), 0.5);
        assert_eq!(d.jumps(), &[(0.5, 0.5)]);

        let away = Path::uniform(1.0, vec![1.0, 2.0, 0.5]).unwrap();
        assert_eq!(occupation_density_zero(&away).unwrap().terminal(), 0.0);

        // touching at a breakpoint: two half contributions
        let v = Path::uniform(1.0, vec![-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(occupation_density_zero(&v).unwrap().terminal(), 0.5);

        let flat = Path::uniform(2.0, vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(occupation_density_zero(&flat), Err(PathError::FlatAtZero(1)));
    }

    #[test]
    fn density_is_band_limit() {
        let p = Path::uniform(3.0, vec![0.4, -0.6, 0.2, 0.0, 1.1, -0.3, -0.1]).unwrap();
        let exact = occupation_density_zero(&p).unwrap().terminal();
        let mut prev = f64::INFINITY;
        for eps in [1e-2, 1e-3, 1e-4, 1e-6] {
            let err = (occupation_band(&p, eps).unwrap().terminal() - exact).abs();
            assert!(err <= prev + 1e-15);
            prev = err;
        }
        assert!(prev < 1e-9);
    }
}
