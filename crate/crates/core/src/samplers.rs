//! Exact finite-dimensional samplers on a uniform grid.
//!
//! Brownian increments are exact Gaussians, so every sampled path has the
//! exact law of its process at the grid times. Sub-streams are derived from
//! the caller's seed with [`derive_seed`]; component `c` of a multi-component
//! sample always uses `derive_seed(seed, c)`.

use thiserror::Error;

use crate::params::Grid;
use crate::path::{uniform_times, Path, Path3};
use crate::rng::{derive_seed, Stream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("no meander endpoint reached {level} within {tries} tries")]
    RejectionExhausted { level: f64, tries: usize },
    #[error("conditioning level must be finite and nonnegative, got {0}")]
    BadLevel(f64),
}

/// Brownian values at the grid times, drawn from `stream`.
fn brownian_values(grid: &Grid, stream: &mut Stream) -> Vec<f64> {
    let n = grid.steps();
    let sd = grid.dt().sqrt();
    let mut values = Vec::with_capacity(n + 1);
    let mut b = 0.0;
    values.push(b);
    for _ in 0..n {
        b += sd * stream.gaussian();
        values.push(b);
    }
    values
}

fn bridge_values(grid: &Grid, x: f64, stream: &mut Stream) -> Vec<f64> {
    let mut values = brownian_values(grid, stream);
    let n = grid.steps();
    let end = values[n];
    for (k, v) in values.iter_mut().enumerate() {
        let w = k as f64 / n as f64;
        *v = *v - w * end + w * x;
    }
    values
}

fn grid_path(grid: &Grid, values: Vec<f64>) -> Path {
    Path::from_parts(uniform_times(grid.horizon(), grid.steps()), values)
}

pub fn sample_bm(grid: &Grid, seed: u64) -> Path {
    grid_path(grid, brownian_values(grid, &mut Stream::new(seed)))
}

/// Bridge from 0 to `x`: `B_s − (s/t)·B_t + (s/t)·x`. The endpoint equals `x`
/// exactly.
pub fn sample_bridge(x: f64, grid: &Grid, seed: u64) -> Path {
    grid_path(grid, bridge_values(grid, x, &mut Stream::new(seed)))
}

pub fn sample_bm3(grid: &Grid, seed: u64) -> Path3 {
    let [a, b, c] = [0, 1, 2].map(|i| sample_bm(grid, derive_seed(seed, i)));
    Path3::new(a, b, c).expect("shared grid")
}

fn radial_values(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    a.iter().zip(b).zip(c).map(|((x, y), z)| (x * x + y * y + z * z).sqrt()).collect()
}

/// Three-dimensional Bessel process from 0: the radial part of [`sample_bm3`]
/// with the same seed.
pub fn sample_bessel3(grid: &Grid, seed: u64) -> Path {
    let [a, b, c] = [0, 1, 2].map(|i| brownian_values(grid, &mut Stream::new(derive_seed(seed, i))));
    grid_path(grid, radial_values(&a, &b, &c))
}

/// A Bessel(3) path on `[0, t]` together with its grid minimum over
/// `[t, K·t]`.
///
/// The path is identical to [`sample_bessel3`] with the same seed; the
/// component streams simply continue past `t` with a step at most four times
/// coarser.
pub fn sample_bessel3_with_future_min(grid: &Grid, trunc_factor: u32, seed: u64) -> (Path, f64) {
    let mut streams = [0, 1, 2].map(|i| Stream::new(derive_seed(seed, i)));
    let [a, b, c] = {
        let [s0, s1, s2] = &mut streams;
        [brownian_values(grid, s0), brownian_values(grid, s1), brownian_values(grid, s2)]
    };
    let n = grid.steps();
    let mut pos = [a[n], b[n], c[n]];
    let path = grid_path(grid, radial_values(&a, &b, &c));

    let extra = (trunc_factor.saturating_sub(1) as usize) * n;
    let future_steps = extra.div_ceil(4);
    let sd = ((trunc_factor - 1) as f64 * grid.horizon() / future_steps as f64).sqrt();
    let mut min_sq = pos.iter().map(|v| v * v).sum::<f64>();
    for _ in 0..future_steps {
        let mut r2 = 0.0;
        for (p, s) in pos.iter_mut().zip(streams.iter_mut()) {
            *p += sd * s.gaussian();
            r2 += *p * *p;
        }
        min_sq = min_sq.min(r2);
    }
    (path, min_sq.sqrt())
}

/// `|(β^x, B², B³)|` with the bridge and the two Brownian components on
/// disjoint streams.
pub fn sample_meander(x: f64, grid: &Grid, seed: u64) -> Path {
    let a = bridge_values(grid, x, &mut Stream::new(derive_seed(seed, 0)));
    let b = brownian_values(grid, &mut Stream::new(derive_seed(seed, 1)));
    let c = brownian_values(grid, &mut Stream::new(derive_seed(seed, 2)));
    grid_path(grid, radial_values(&a, &b, &c))
}

/// `M^0` conditioned on `M^0_t ≥ level`, by rejection. Try `i` uses seed
/// `derive_seed(seed, i)`.
pub fn sample_meander_conditioned(level: f64, grid: &Grid, seed: u64, max_tries: usize) -> Result<Path, SampleError> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(SampleError::BadLevel(level));
    }
    for i in 0..max_tries as u64 {
        let m = sample_meander(0.0, grid, derive_seed(seed, i));
        if m.terminal() >= level {
            return Ok(m);
        }
    }
    Err(SampleError::RejectionExhausted { level, tries: max_tries })
}

/// Stream index, under a replicate's seed, reserved for [`with_bridge_extremes`].
pub const EXTREMES_STREAM: u64 = 1 << 40;

/// Law of a sampled path between its breakpoints, given the values there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentLaw {
    /// Brownian bridge: Brownian motion and bridges.
    Brownian,
    /// Bessel(3) bridge, i.e. a Brownian bridge conditioned not to hit 0:
    /// radial parts of 3-d Brownian motion, Bessel(3) paths and meanders.
    Bessel3,
}

/// Below this value of `2ab/h` a Bessel(3) bridge from `a` to `b` is not
/// replaced by the unconditioned Brownian bridge when drawing its maximum;
/// above it the conditioning event has probability `1 − e^{−30}`.
const BESSEL_MAX_EXACT_BELOW: f64 = 30.0;

/// `m` with `P(max ≤ m) = 1 − e^{−E}` for a Brownian bridge `a → b` over `h`.
fn brownian_bridge_max(a: f64, b: f64, h: f64, e: f64) -> f64 {
    0.5 * (a + b + ((b - a).powi(2) + 2.0 * h * e).sqrt())
}

/// `m` with `P(min ≥ m) = u` for a Bessel(3) bridge `a → b` over `h`, from
/// `P(min > m) = (1 − e^{−2(a−m)(b−m)/h}) / (1 − e^{−2ab/h})`.
fn bessel3_bridge_min(a: f64, b: f64, h: f64, u: f64) -> f64 {
    let c = -0.5 * h * (u * (-2.0 * a * b / h).exp_m1()).ln_1p();
    (0.5 * (a + b - ((a - b).powi(2) + 4.0 * c).sqrt())).clamp(0.0, a.min(b))
}

/// `P(max ≤ m)` for a Bessel(3) bridge `a → b` over `h`, `m ≥ max(a, b)`:
/// the image series for Brownian motion killed at 0 and `m`, divided by the
/// probability of not hitting 0.
pub(crate) fn bessel3_bridge_max_cdf(a: f64, b: f64, h: f64, m: f64) -> f64 {
    let d0 = b - a;
    let denom = -(-2.0 * a * b / h).exp_m1();
    // Image at 2km, relative to the k = 0 free term: e^{…}(1 − e^{−2a(b+2km)/h}),
    // or its a → 0 limit, over `denom`.
    let image = |k: i32| {
        let shift = 2.0 * f64::from(k) * m;
        let e1 = (-((d0 + shift).powi(2) - d0 * d0) / (2.0 * h)).exp();
        if denom > 1e-300 {
            e1 * -(-2.0 * a * (b + shift) / h).exp_m1() / denom
        } else {
            e1 * (b + shift) / b
        }
    };
    let mut sum = image(0);
    for k in 1..=1000 {
        let term = image(k) + image(-k);
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// `m` with `P(max ≤ m) = u` for a Bessel(3) bridge `a → b` over `h`.
fn bessel3_bridge_max(a: f64, b: f64, h: f64, u: f64) -> f64 {
    // Conditioning on staying positive raises the maximum, so the unconditioned
    // quantile is a lower bracket.
    let mut lo = brownian_bridge_max(a, b, h, -(-u).ln_1p());
    let mut step = 0.25 * h.sqrt();
    let mut hi = lo + step;
    while bessel3_bridge_max_cdf(a, b, h, hi) < u {
        lo = hi;
        step *= 2.0;
        hi += step;
    }
    // Illinois false position on the bracket.
    let (mut flo, mut fhi) = (bessel3_bridge_max_cdf(a, b, h, lo) - u, bessel3_bridge_max_cdf(a, b, h, hi) - u);
    let mut side = 0;
    for _ in 0..100 {
        if hi - lo <= 1e-13 * hi {
            break;
        }
        let mid = if fhi > flo { (lo * fhi - hi * flo) / (fhi - flo) } else { 0.5 * (lo + hi) };
        let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
        let fm = bessel3_bridge_max_cdf(a, b, h, mid) - u;
        if fm == 0.0 {
            return mid;
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

/// Stream index, under a replicate's seed, reserved for [`subdivide_near_zero`].
pub const SUBDIVIDE_STREAM: u64 = 1 << 43;

/// Replaces every segment of a path with Bessel(3)-bridge segments whose
/// lower endpoint is below `below` by `factor` segments, drawing the new
/// breakpoints from the exact bridge law: the norm of a 3-d Brownian bridge
/// from `(a, 0, 0)` to `b·u`, where the direction `u` has the von Mises–Fisher
/// law with concentration `ab/h`.
///
/// Near 0 a Bessel(3) path moves on the scale of its own value within one
/// step, so this is where functionals of the fine structure lose most to
/// discretization.
pub fn subdivide_near_zero(p: &Path, below: f64, factor: usize, seed: u64) -> Path {
    let mut s = Stream::new(seed);
    let mut times = Vec::with_capacity(p.len());
    let mut values = Vec::with_capacity(p.len());
    times.push(p.times()[0]);
    values.push(p.start());
    for seg in p.segments() {
        let (a, b) = (seg.va, seg.vb);
        let h = seg.tb - seg.ta;
        if factor > 1 && a.min(b) < below {
            let kappa = a * b / h;
            let u = s.uniform01();
            let w = if kappa > 0.0 {
                (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
            } else {
                2.0 * u - 1.0
            };
            let phi = std::f64::consts::TAU * s.uniform01();
            let r = (1.0 - w * w).sqrt();
            let end = [b * w, b * r * phi.cos(), b * r * phi.sin()];
            let sd = (h / factor as f64).sqrt();
            let mut walk = vec![[0.0; 3]; factor + 1];
            for j in 1..=factor {
                let prev = walk[j - 1];
                for (w, p) in walk[j].iter_mut().zip(prev) {
                    *w = p + sd * s.gaussian();
                }
            }
            for j in 1..factor {
                let f = j as f64 / factor as f64;
                let start = [a, 0.0, 0.0];
                let norm2: f64 = (0..3)
                    .map(|c| (walk[j][c] - f * walk[factor][c] + start[c] + f * (end[c] - start[c])).powi(2))
                    .sum();
                times.push(seg.ta + f * h);
                values.push(norm2.sqrt());
            }
        }
        times.push(seg.tb);
        values.push(b);
    }
    Path::from_parts(times, values)
}

/// Inserts into every segment of `p` a draw of the segment's maximum and of
/// its minimum under `law` given the segment's endpoints. For Brownian
/// segments these are `(a + b ± sqrt((b − a)² + 2h·E)) / 2` with `E` standard
/// exponential; Bessel(3) minima invert a closed form and maxima an image
/// series, the latter only where the bridge comes within a few `√h` of 0.
///
/// Running extrema at the original breakpoints then have their exact law
/// instead of the grid law, which is biased by about `0.58·√h`. The max and
/// min of one segment are drawn independently, and only their marginals are
/// exact.
///
/// Within a segment the two points sit at one and two thirds of its length,
/// the minimum first on rising segments.
pub fn with_bridge_extremes(p: &Path, law: SegmentLaw, seed: u64) -> Path {
    let mut s = Stream::new(seed);
    let n = p.len();
    let mut times = Vec::with_capacity(3 * n - 2);
    let mut values = Vec::with_capacity(3 * n - 2);
    times.push(p.times()[0]);
    values.push(p.start());
    for seg in p.segments() {
        let (a, b) = (seg.va, seg.vb);
        let h = seg.tb - seg.ta;
        let (lo, hi) = match law {
            SegmentLaw::Brownian => {
                let hi = brownian_bridge_max(a, b, h, s.exponential());
                (a + b - brownian_bridge_max(a, b, h, s.exponential()), hi)
            }
            SegmentLaw::Bessel3 => {
                let hi = if 2.0 * a * b / h > BESSEL_MAX_EXACT_BELOW {
                    brownian_bridge_max(a, b, h, s.exponential())
                } else {
                    bessel3_bridge_max(a, b, h, s.uniform01())
                };
                (bessel3_bridge_min(a, b, h, s.uniform01()), hi)
            }
        };
        let (first, second) = if b >= a { (lo, hi) } else { (hi, lo) };
        times.extend([seg.ta + h / 3.0, seg.ta + 2.0 * h / 3.0, seg.tb]);
        values.extend([first, second, b]);
    }
    Path::from_parts(times, values)
}

/// Draws `θ ∈ [0, h]` with density proportional to `f_a(θ)·f_b(h − θ)`, where
/// `f_c(u) = c·exp(−c²/2u)/sqrt(2πu³)` is the density of the first passage of
/// Brownian motion to level `c`.
///
/// This is the law of the time of the maximum `M` of a Brownian bridge from
/// `M − a` to `M − b` over `[0, h]`, and of the time at which a bridge from
/// `±a₀` to `±b₀` accumulates local time `ℓ` at 0 given its total local time
/// `L` (`a = a₀ + ℓ`, `b = b₀ + L − ℓ`). With `y = θ/(h − θ)` the density is
/// an equal-shape mix of `IG(a/b, a²/h)` and the reciprocal of
/// `IG(b/a, b²/h)` with weights `b : a`.
pub fn sample_split_time(a: f64, b: f64, h: f64, s: &mut Stream) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if b <= 0.0 {
        return h;
    }
    if s.uniform01() * (a + b) < b {
        let y = s.inverse_gaussian(a / b, a * a / h);
        h * (y / (1.0 + y))
    } else {
        let z = s.inverse_gaussian(b / a, b * b / h);
        h / (1.0 + z)
    }
}

/// Stream index, under a replicate's seed, reserved for [`sample_local_time`].
pub const LOCAL_TIME_STREAM: u64 = 1 << 41;

/// Draws the local time at 0 of a Brownian path through the breakpoints of
/// `p`, as a PL path through its cumulative values at those breakpoints.
///
/// Given its endpoints `a`, `b`, a segment of length `h` is a Brownian bridge
/// whose local time at 0 satisfies
/// `P(L > ℓ) = exp(−((|a| + |b| + ℓ)² − (b − a)²) / 2h)` for `ℓ ≥ 0`,
/// so `L = (sqrt((b − a)² + 2h·E) − |a| − |b|)₊` with `E` standard exponential.
/// The values at breakpoints therefore have their exact joint law with `p`;
/// between breakpoints the increment is spread linearly.
pub fn sample_local_time(p: &Path, seed: u64) -> Path {
    let mut s = Stream::new(seed);
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(p.len());
    values.push(0.0);
    for seg in p.segments() {
        let h = seg.tb - seg.ta;
        let reach = ((seg.vb - seg.va).powi(2) + 2.0 * h * s.exponential()).sqrt();
        acc += (reach - seg.va.abs() - seg.vb.abs()).max(0.0);
        values.push(acc);
    }
    Path::from_parts(p.times().to_vec(), values)
}

/// Stream index, under a replicate's seed, reserved for the in-segment times
/// drawn by [`local_time_passage`] and the midpoints of [`refine_near_max`].
pub const SPLIT_STREAM: u64 = 1 << 42;

/// Stream index, under a replicate's seed, reserved for [`last_passage`].
pub const PASSAGE_STREAM: u64 = 1 << 44;

/// First time the local time at 0 of the Brownian path through the
/// breakpoints of `p` reaches `level`, given its cumulative values `lambda`
/// at those breakpoints (as produced by [`sample_local_time`]). The segment is
/// read off `lambda` and the time inside it drawn from its exact conditional
/// law by [`sample_split_time`]. 0 when `level ≤ 0`; `None` when `lambda`
/// never reaches `level`.
pub fn local_time_passage(p: &Path, lambda: &Path, level: f64, seed: u64) -> Option<f64> {
    if level <= 0.0 {
        return Some(0.0);
    }
    let lv = lambda.values();
    let k = lv.windows(2).position(|w| w[1] >= level)?;
    let (ta, tb) = (p.times()[k], p.times()[k + 1]);
    let (va, vb) = (p.values()[k], p.values()[k + 1]);
    let before = level - lv[k];
    let after = lv[k + 1] - level;
    let theta = sample_split_time(va.abs() + before, vb.abs() + after, tb - ta, &mut Stream::new(seed));
    Some((ta + theta).min(tb))
}

/// Events whose probability under the segment's bridge law is below this are
/// treated as impossible when deciding where to refine.
const NEGLIGIBLE: f64 = 1e-12;

/// Exact midpoint of a Brownian bridge `a → b` over `h`.
fn bridge_midpoint(a: f64, b: f64, h: f64, s: &mut Stream) -> f64 {
    0.5 * (a + b) + 0.5 * h.sqrt() * s.gaussian()
}

/// `P(max > m)` for a Brownian bridge `a → b` over `h`.
fn exceed_probability(a: f64, b: f64, h: f64, m: f64) -> f64 {
    if a >= m || b >= m {
        1.0
    } else {
        (-2.0 * (m - a) * (m - b) / h).exp()
    }
}

/// Refines a Brownian path around its global maximum: every segment that
/// could exceed the running best by more than a negligible probability is
/// halved, with the exact bridge midpoint, until its length is at most
/// `leaf`. The argmax of the result is within `leaf` of the argmax of the
/// underlying Brownian path (up to probability ~`1e−12` per segment).
pub fn refine_near_max(p: &Path, leaf: f64, seed: u64) -> Path {
    fn split(
        (ta, a): (f64, f64),
        (tb, b): (f64, f64),
        leaf: f64,
        best: &mut f64,
        s: &mut Stream,
        out: &mut Vec<(f64, f64)>,
    ) {
        let h = tb - ta;
        if h <= leaf || exceed_probability(a, b, h, *best) < NEGLIGIBLE {
            return;
        }
        let mid = (0.5 * (ta + tb), bridge_midpoint(a, b, h, s));
        *best = best.max(mid.1);
        split((ta, a), mid, leaf, best, s, out);
        out.push(mid);
        split(mid, (tb, b), leaf, best, s, out);
    }
    let mut s = Stream::new(seed);
    let mut best = p.max_value();
    let mut pts = Vec::with_capacity(p.len() + 64);
    pts.push((p.times()[0], p.start()));
    for seg in p.segments() {
        split((seg.ta, seg.va), (seg.tb, seg.vb), leaf, &mut best, &mut s, &mut pts);
        pts.push((seg.tb, seg.vb));
    }
    let (times, values) = pts.into_iter().unzip();
    Path::from_parts(times, values)
}

/// `sup{s : B_s = level}` for the Brownian path through the breakpoints of
/// `p`, or 0 when there is no such time.
///
/// Segments are searched from the right. A segment that crosses `level`, or
/// whose bridge touches it with non-negligible probability
/// `exp(−2(a − level)(b − level)/h)`, is halved at the exact bridge midpoint,
/// right half first, down to length `leaf`; a leaf that does not cross is
/// accepted with its touching probability. The result is within `leaf` of the
/// last passage of the underlying path.
pub fn last_passage(p: &Path, level: f64, leaf: f64, seed: u64) -> f64 {
    fn search(ta: f64, a: f64, tb: f64, b: f64, leaf: f64, s: &mut Stream) -> Option<f64> {
        if b == 0.0 {
            return Some(tb);
        }
        let h = tb - ta;
        let crosses = a * b <= 0.0;
        let touch = if crosses { 1.0 } else { (-2.0 * a * b / h).exp() };
        if touch < NEGLIGIBLE {
            return None;
        }
        if h <= leaf {
            return if crosses {
                Some(ta + a / (a - b) * h)
            } else if s.uniform01() < touch {
                Some(ta + 0.5 * h)
            } else {
                None
            };
        }
        let tm = 0.5 * (ta + tb);
        let vm = bridge_midpoint(a, b, h, s);
        search(tm, vm, tb, b, leaf, s).or_else(|| search(ta, a, tm, vm, leaf, s))
    }
    let mut s = Stream::new(seed);
    let segments: Vec<_> = p.segments().collect();
    segments
        .into_iter()
        .rev()
        .find_map(|seg| search(seg.ta, seg.va - level, seg.tb, seg.vb - level, leaf, &mut s))
        .unwrap_or(0.0)
}
