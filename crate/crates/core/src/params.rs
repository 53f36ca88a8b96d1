use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("endpoint must be finite, got {0}")]
    Endpoint(f64),
    #[error("at least 2 grid steps are required, got {0}")]
    Steps(usize),
    #[error("at least one replicate is required")]
    Replicates,
    #[error("band half-width must be positive and finite, got {0}")]
    BandEps(f64),
    #[error("truncation factor must be at least 2, got {0}")]
    TruncFactor(u32),
}

/// A validated uniform time grid on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    horizon: f64,
    steps: usize,
}

impl Grid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, ParamError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(ParamError::Horizon(horizon));
        }
        if steps < 2 {
            return Err(ParamError::Steps(steps));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// Parameters of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub t: f64,
    pub x: f64,
    pub n_steps: usize,
    pub replicates: usize,
    pub seed: u64,
    pub band_eps: f64,
    pub trunc_factor: u32,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            t: 1.0,
            x: 0.0,
            n_steps: 2048,
            replicates: 20_000,
            seed: 42,
            band_eps: default_band_eps(1.0, 2048),
            trunc_factor: 256,
        }
    }
}

/// `sqrt(t / n)`: the local-time band half-width matched to the grid.
pub fn default_band_eps(t: f64, n_steps: usize) -> f64 {
    (t / n_steps as f64).sqrt()
}

impl RunParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        self.grid()?;
        if !self.x.is_finite() {
            return Err(ParamError::Endpoint(self.x));
        }
        if self.replicates == 0 {
            return Err(ParamError::Replicates);
        }
        if !(self.band_eps > 0.0 && self.band_eps.is_finite()) {
            return Err(ParamError::BandEps(self.band_eps));
        }
        if self.trunc_factor < 2 {
            return Err(ParamError::TruncFactor(self.trunc_factor));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ParamError> {
        Grid::new(self.t, self.n_steps)
    }

    /// Same run with the band width reset to [`default_band_eps`] for its grid.
    pub fn with_default_band(mut self) -> Self {
        self.band_eps = default_band_eps(self.t, self.n_steps);
        self
    }
}
