//! Counter-based seed derivation and the scalar random streams built on it.
//!
//! Every random object in a run is drawn from its own stream, seeded by
//! chaining [`derive_seed`] from the run's base seed. Nothing is shared between
//! replicates, so results do not depend on how replicates are scheduled.

use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, Exp1, StandardNormal};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

/// The 64-bit golden-ratio increment.
pub const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Mixes `(base, index)` into a new seed: `base + index·γ`, then one SplitMix64
/// step (another `+γ` and the 64-bit finalizer).
///
/// Injective in `index` for fixed `base`, and never a fixed point at zero.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    SplitMix64::seed_from_u64(base.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA))).next_u64()
}

/// A uniform/Gaussian stream over SplitMix64.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: SplitMix64,
    spare: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self { rng: SplitMix64::seed_from_u64(seed), spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the ziggurat method. Used for path increments, where
    /// it is several times cheaper than [`Stream::box_muller`].
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Standard exponential by the ziggurat method.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    /// Inverse Gaussian with the given mean and shape (Michael–Schucany–Haas),
    /// with the root written so that it does not cancel when `mean/shape` is
    /// large or small.
    pub fn inverse_gaussian(&mut self, mean: f64, shape: f64) -> f64 {
        let z = self.gaussian();
        let r = mean * z * z / (2.0 * shape);
        let x = mean / (1.0 + r + (r * r + 2.0 * r).sqrt());
        if self.uniform01() * (mean + x) <= mean {
            x
        } else {
            mean * mean / x
        }
    }

    /// Standard normal by Box–Muller; both variates of each pair are used.
    pub fn box_muller(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Uniform01,
    Rademacher,
    VUniformSym,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSample {
    pub value: f64,
    pub kind: ScalarKind,
}

pub fn sample_scalar(kind: ScalarKind, seed: u64) -> ScalarSample {
    let mut s = Stream::new(seed);
    let value = match kind {
        ScalarKind::Uniform01 => s.uniform01(),
        ScalarKind::Rademacher => {
            if s.uniform01() - 0.5 >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }
        ScalarKind::VUniformSym => 2.0 * s.uniform01() - 1.0,
        ScalarKind::Gaussian => s.box_muller(),
    };
    ScalarSample { value, kind }
}
