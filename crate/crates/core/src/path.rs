//! Continuous paths on `[0, t]` stored as piecewise-linear interpolants.

use thiserror::Error;

/// Relative tolerance below which two breakpoint times are treated as one.
pub(crate) const TIME_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("a path needs at least two breakpoints, got {0}")]
    TooShort(usize),
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("first breakpoint must be at time 0, got {0}")]
    NonZeroStart(f64),
    #[error("breakpoint times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("time {s} lies outside [0, {horizon}]")]
    OutOfRange { s: f64, horizon: f64 },
    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(f64, f64),
    #[error("component times are not aligned")]
    Misaligned,
    #[error("non-finite coefficient")]
    NonFiniteCoefficient,
    #[error("band half-width must be positive, got {0}")]
    BadBand(f64),
    #[error("segment {0} is identically zero; occupation density at 0 is undefined")]
    FlatAtZero(usize),
    #[error("path is decreasing on segment {0}")]
    Decreasing(usize),
}

/// A real continuous function on `[0, t]`, linear between breakpoints.
///
/// Breakpoint times are strictly increasing, start at 0 and end at the
/// horizon `t`. Values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, PathError> {
        if times.len() != values.len() {
            return Err(PathError::LengthMismatch { times: times.len(), values: values.len() });
        }
        if times.len() < 2 {
            return Err(PathError::TooShort(times.len()));
        }
        for (i, (t, v)) in times.iter().zip(&values).enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(PathError::NonFinite(i));
            }
        }
        if times[0] != 0.0 {
            return Err(PathError::NonZeroStart(times[0]));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(PathError::NotIncreasing(i + 1));
        }
        Ok(Self { times, values })
    }

    /// Path on the uniform grid `k * horizon / n`, `k = 0..=n`, where `n + 1` is the
    /// number of values.
    pub fn uniform(horizon: f64, values: Vec<f64>) -> Result<Self, PathError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(PathError::BadHorizon(horizon));
        }
        if values.len() < 2 {
            return Err(PathError::TooShort(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PathError::NonFinite(i));
        }
        Ok(Self { times: uniform_times(horizon, values.len() - 1), values })
    }

    pub fn constant(horizon: f64, value: f64) -> Result<Self, PathError> {
        Self::uniform(horizon, vec![value, value])
    }

    /// Construction for outputs of operations that maintain the invariants themselves.
    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(Self::new(times.clone(), values.clone()).is_ok(), "invalid path construction");
        Self { times, values }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn start(&self) -> f64 {
        self.values[0]
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest absolute value; the sup norm of the interpolant.
    pub fn amplitude(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn time_tol(&self) -> f64 {
        TIME_TOL * self.horizon()
    }

    /// Value of the interpolant at `s`; exact at breakpoints.
    pub fn eval(&self, s: f64) -> Result<f64, PathError> {
        let t = self.horizon();
        if !(0.0..=t).contains(&s) {
            return Err(PathError::OutOfRange { s, horizon: t });
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        // first index with time > s
        let k = self.times.partition_point(|&u| u <= s);
        if k == 0 {
            return self.values[0];
        }
        if k == self.times.len() {
            return self.terminal();
        }
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        if s == ta {
            return self.values[k - 1];
        }
        interpolate(ta, self.values[k - 1], tb, self.values[k], s)
    }

    /// Exact integral of the interpolant over `[0, t]`.
    pub fn integral(&self) -> f64 {
        self.times.windows(2).zip(self.values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
    }

    pub(crate) fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.times.windows(2).zip(self.values.windows(2)).map(|(t, v)| Segment {
            ta: t[0],
            tb: t[1],
            va: v[0],
            vb: v[1],
        })
    }
}

pub(crate) fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * horizon / n as f64).collect();
    times[n] = horizon;
    times
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub ta: f64,
    pub tb: f64,
    pub va: f64,
    pub vb: f64,
}

impl Segment {
    /// Time in `(ta, tb)` where the segment reaches `level`; only meaningful when
    /// `level` lies strictly between `va` and `vb`.
    pub fn crossing(&self, level: f64) -> f64 {
        self.ta + (level - self.va) / (self.vb - self.va) * (self.tb - self.ta)
    }
}

#[inline]
pub(crate) fn interpolate(ta: f64, va: f64, tb: f64, vb: f64, s: f64) -> f64 {
    va + (vb - va) * ((s - ta) / (tb - ta))
}

/// Accumulates breakpoints, dropping interior points that would create
/// near-zero-length segments.
pub(crate) struct PathBuilder {
    times: Vec<f64>,
    values: Vec<f64>,
    tol: f64,
    /// Whether the last point was inserted by [`PathBuilder::push_interior`].
    last_interior: bool,
}

impl PathBuilder {
    pub fn with_capacity(horizon: f64, cap: usize) -> Self {
        Self {
            times: Vec::with_capacity(cap),
            values: Vec::with_capacity(cap),
            tol: TIME_TOL * horizon,
            last_interior: false,
        }
    }

    /// Pushes a breakpoint that must be kept (an original grid time).
    pub fn push(&mut self, t: f64, v: f64) {
        if let Some(&last) = self.times.last() {
            if self.last_interior && t <= last + self.tol {
                // an inserted crossing landed on this grid time: the grid time wins
                self.times.pop();
                self.values.pop();
            }
        }
        self.times.push(t);
        self.values.push(v);
        self.last_interior = false;
    }

    /// Pushes an inserted crossing point strictly inside `(last, next)`.
    pub fn push_interior(&mut self, t: f64, v: f64, next: f64) {
        let last = *self.times.last().expect("interior point before first breakpoint");
        if t > last + self.tol && t < next - self.tol {
            self.times.push(t);
            self.values.push(v);
            self.last_interior = true;
        }
    }

    pub fn finish(self) -> Path {
        Path::from_parts(self.times, self.values)
    }
}

/// Three paths sharing one breakpoint grid: the coordinates of a 3D path.
#[derive(Debug, Clone, PartialEq)]
pub struct Path3 {
    components: [Path; 3],
}

impl Path3 {
    pub fn new(first: Path, second: Path, third: Path) -> Result<Self, PathError> {
        if first.times() != second.times() || first.times() != third.times() {
            return Err(PathError::Misaligned);
        }
        Ok(Self { components: [first, second, third] })
    }

    pub fn component(&self, i: usize) -> &Path {
        &self.components[i]
    }

    pub fn components(&self) -> &[Path; 3] {
        &self.components
    }

    pub fn times(&self) -> &[f64] {
        self.components[0].times()
    }

    pub fn horizon(&self) -> f64 {
        self.components[0].horizon()
    }

    /// Euclidean norm sampled at the breakpoints.
    ///
    /// The norm of a PL map is not PL; between breakpoints the result is the
    /// linear interpolant of the sampled norms.
    pub fn radial(&self) -> Path {
        let [a, b, c] = &self.components;
        let values = a
            .values()
            .iter()
            .zip(b.values())
            .zip(c.values())
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
            .collect();
        Path::from_parts(self.times().to_vec(), values)
    }
}
