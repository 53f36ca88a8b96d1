//! Shared fixtures: random and adversarial PL paths, and an exact-arithmetic
//! oracle for the deterministic identities on lattice paths.

#![allow(dead_code)]

use bridge_transforms::identities::checks::{check_inverse, check_lpit, check_piecewise, check_suff, tolerance};
use bridge_transforms::path::Path;
use bridge_transforms::rng::{derive_seed, Stream};
use num_rational::Ratio;

pub type Q = Ratio<i64>;

/// Gaussian-increment path with `n_points` breakpoints on jittered times.
pub fn random_path(seed: u64, n_points: usize) -> Path {
    let mut s = Stream::new(seed);
    let horizon = 0.1 + 5.0 * s.uniform01();
    let mut times = vec![0.0];
    let mut acc = 0.0;
    let gaps: Vec<f64> = (1..n_points).map(|_| 0.05 + s.uniform01()).collect();
    let total: f64 = gaps.iter().sum();
    for g in &gaps[..gaps.len() - 1] {
        acc += g / total * horizon;
        times.push(acc);
    }
    times.push(horizon);
    let mut v = s.gaussian();
    let values = (0..n_points)
        .map(|_| {
            let out = v;
            v += s.gaussian();
            out
        })
        .collect();
    Path::new(times, values).expect("valid random path")
}

/// Shift to start at 0 and flip so the end is at or below 0.
pub fn bridge_like(p: &Path) -> Path {
    let sign = if p.terminal() - p.start() > 0.0 { -1.0 } else { 1.0 };
    let values = p.values().iter().map(|v| sign * (v - p.start())).collect();
    Path::new(p.times().to_vec(), values).expect("same times")
}

/// Monotone, zigzag, tied-maxima, flat, tiny- and huge-scale and
/// short-segment paths.
pub fn adversarial_paths() -> Vec<Path> {
    let uni = |t: f64, v: Vec<f64>| Path::uniform(t, v).expect("valid");
    let mut out = vec![
        uni(1.0, (0..50).map(f64::from).collect()),
        uni(1.0, (0..50).map(|k| -f64::from(k)).collect()),
        uni(2.0, (0..65).map(|k| if k % 2 == 0 { 0.0 } else { 1.0 }).collect()),
        uni(2.0, (0..65).map(|k| if k % 2 == 0 { 0.0 } else { -1.0 }).collect()),
        uni(3.0, vec![0.0, 2.0, 1.0, 2.0, 1.0, 2.0, 0.0]),
        uni(3.0, vec![0.0, 2.0, 2.0, 2.0, -1.0, 2.0, -3.0]),
        uni(1.0, vec![0.0, 0.0, 0.0, 0.0]),
        uni(1.0, vec![5.0, 5.0]),
        uni(1.0, (0..30).map(|k| 1e-9 * f64::from(k % 7) - 3e-9).collect()),
        uni(1.0, (0..30).map(|k| 1e6 * f64::from((k * 13) % 11) - 5e6).collect()),
        uni(4.0, vec![0.0, 1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 0.0]),
    ];
    // short segments: crossings inside are placed to within ulp(t), so the
    // value error is slope·ulp(t); keep that below the tolerance
    let times = vec![0.0, 1e-12, 2e-12, 0.5, 0.5 + 1e-6, 1.0];
    out.push(Path::new(times, vec![0.0, 1.0, -1.0, 0.5, -2.0, 0.25]).expect("valid"));
    out
}

/// The four checkers' deviations relative to their tolerance (≤ 1 passes).
/// Bridge-only checkers are applied to [`bridge_like`] of `p`.
pub fn checker_ratios(p: &Path) -> [f64; 4] {
    let b = bridge_like(p);
    [
        check_lpit(p) / tolerance(p),
        check_inverse(p) / tolerance(p),
        check_suff(&b).expect("bridge-like") / tolerance(&b),
        check_piecewise(&b).expect("bridge-like") / tolerance(&b),
    ]
}

/// Worst checker ratio over 1000 random paths (4–1024 breakpoints) and the
/// adversarial shapes, with the offending path's description.
pub fn worst_checker_ratio() -> (f64, String) {
    let mut worst = (0.0, String::new());
    let mut consider = |p: &Path, label: String| {
        for (k, r) in checker_ratios(p).into_iter().enumerate() {
            if r.is_nan() || r > worst.0 {
                worst = (r, format!("{label}, checker {k}"));
            }
        }
    };
    let mut s = Stream::new(derive_seed(2024, 0));
    for i in 0..1000u64 {
        let n = 4 + (s.uniform01() * 1021.0) as usize;
        consider(&random_path(derive_seed(2024, i + 1), n), format!("random path {i} ({n} points)"));
    }
    for (i, p) in adversarial_paths().iter().enumerate() {
        consider(p, format!("adversarial path {i}"));
    }
    worst
}

/// An integer lattice path on times `0, 1, …, n`, evaluated exactly.
pub struct Lattice(pub Vec<i64>);

impl Lattice {
    fn n(&self) -> i64 {
        self.0.len() as i64 - 1
    }

    pub fn eval(&self, s: Q) -> Q {
        let k = s.floor().to_integer().min(self.n() - 1);
        let (a, b) = (self.0[k as usize], self.0[k as usize + 1]);
        Q::from(a) + (s - Q::from(k)) * Q::from(b - a)
    }

    fn knots_in(&self, lo: Q, hi: Q) -> impl Iterator<Item = i64> + '_ {
        (0..=self.n()).filter(move |&k| Q::from(k) >= lo && Q::from(k) <= hi)
    }

    pub fn max_on(&self, lo: Q, hi: Q) -> Q {
        let ends = self.eval(lo).max(self.eval(hi));
        self.knots_in(lo, hi).map(|k| Q::from(self.0[k as usize])).fold(ends, Q::max)
    }

    pub fn pitman(&self, u: Q) -> Q {
        Q::from(2) * self.max_on(Q::from(0), u) - self.eval(u)
    }

    /// Breakpoints of the Pitman image: the knots and every time a rising
    /// segment crosses the running maximum.
    fn pitman_breakpoints(&self) -> Vec<Q> {
        let mut out: Vec<Q> = (0..=self.n()).map(Q::from).collect();
        let mut running = self.0[0];
        for k in 0..self.n() as usize {
            let (a, b) = (self.0[k], self.0[k + 1]);
            if b > running && a < running {
                out.push(Q::from(k as i64) + Q::new(running - a, b - a));
            }
            running = running.max(b);
        }
        out
    }

    /// `min_{[s,n]} P`, minimizing over `s` and the breakpoints after it.
    pub fn pitman_suffix_min(&self, s: Q) -> Q {
        self.pitman_breakpoints().into_iter().filter(|&u| u > s).map(|u| self.pitman(u)).fold(self.pitman(s), Q::min)
    }

    /// Evaluation times: all multiples of 1/12, which contain every
    /// breakpoint of both sides of either identity (slopes are in
    /// {0, ±1, ±2} and levels are integers).
    pub fn fine_times(&self) -> impl Iterator<Item = Q> + '_ {
        (0..=12 * self.n()).map(|k| Q::new(k, 12))
    }

    /// Largest `|lhs − rhs|` of `min_{[s,t]} P = 2·max_{[0,s]} − min{max_{[0,s]}, max_{[s,t]}}`.
    pub fn lpit_deviation(&self) -> Q {
        let (zero, t) = (Q::from(0), Q::from(self.n()));
        self.fine_times()
            .map(|s| {
                let a = self.max_on(zero, s);
                let rhs = Q::from(2) * a - a.min(self.max_on(s, t));
                abs(self.pitman_suffix_min(s) - rhs)
            })
            .fold(zero, Q::max)
    }

    /// Same for the bridge identity (start 0, end `−|x|`).
    pub fn suff_deviation(&self) -> Q {
        let (zero, t) = (Q::from(0), Q::from(self.n()));
        let x_abs = -Q::from(*self.0.last().expect("nonempty"));
        let cap = self.pitman(t) - x_abs;
        self.fine_times()
            .map(|s| {
                let a = self.max_on(zero, s);
                let lhs = Q::from(2) * a - self.pitman_suffix_min(s).min(cap);
                let rhs = a.min(self.max_on(s, t).max(zero));
                abs(lhs - rhs)
            })
            .fold(zero, Q::max)
    }

    pub fn to_path(&self) -> Path {
        Path::uniform(self.n() as f64, self.0.iter().map(|&v| v as f64).collect()).expect("valid lattice path")
    }
}

/// Every path from 0 with steps in {−1, 0, +1} and 1 to `max_len` steps.
pub fn lattice_paths(max_len: u32) -> impl Iterator<Item = Lattice> {
    (1..=max_len).flat_map(|n| {
        (0..3i64.pow(n)).map(move |mut code| {
            let mut v = vec![0i64];
            for _ in 0..n {
                let step = code % 3 - 1;
                code /= 3;
                v.push(v.last().expect("nonempty") + step);
            }
            Lattice(v)
        })
    })
}

pub struct LatticeSummary {
    pub paths: usize,
    pub bridge_paths: usize,
    /// Exact-arithmetic deviations; zero when the identities hold.
    pub exact_lpit: Q,
    pub exact_suff: Q,
    /// The floating-point checkers on the same paths.
    pub float_worst: f64,
}

pub fn lattice_summary(max_len: u32) -> LatticeSummary {
    let mut out =
        LatticeSummary { paths: 0, bridge_paths: 0, exact_lpit: Q::from(0), exact_suff: Q::from(0), float_worst: 0.0 };
    for l in lattice_paths(max_len) {
        out.paths += 1;
        out.exact_lpit = out.exact_lpit.max(l.lpit_deviation());
        let p = l.to_path();
        out.float_worst = out.float_worst.max(check_lpit(&p)).max(check_inverse(&p));
        if *l.0.last().expect("nonempty") <= 0 {
            out.bridge_paths += 1;
            out.exact_suff = out.exact_suff.max(l.suff_deviation());
            out.float_worst =
                out.float_worst.max(check_suff(&p).expect("bridge")).max(check_piecewise(&p).expect("bridge"));
        }
    }
    out
}

/// `∫_{lo}^∞ f(r)·density(r) dr` for the law of `R_t`, by composite Simpson.
pub fn bessel3_terminal_expectation(t: f64, lo: f64, f: impl Fn(f64) -> f64) -> f64 {
    let density = |r: f64| 2.0 * r * r * (-r * r / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t.powi(3)).sqrt();
    let hi = lo + 40.0 * t.sqrt();
    let n = 200_000;
    let h = (hi - lo) / n as f64;
    let g = |r: f64| if r == 0.0 { 0.0 } else { f(r) * density(r) };
    let inner: f64 = (1..n).map(|k| (if k % 2 == 1 { 4.0 } else { 2.0 }) * g(lo + k as f64 * h)).sum();
    (g(lo) + inner + g(hi)) * h / 3.0
}

fn abs(q: Q) -> Q {
    if q < Q::from(0) {
        -q
    } else {
        q
    }
}
