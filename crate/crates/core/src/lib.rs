//! Pitman and Lévy type path transforms for Brownian bridges.
//!
//! Paths are continuous piecewise-linear functions on `[0, t]`. Every
//! transform here (running extrema, the Pitman transform `2·max − φ`, its
//! inverse `L_y`, occupation-band local time) is computed exactly on that
//! representation, inserting crossing breakpoints where needed, so
//! deterministic identities between transforms hold to rounding error.
//!
//! Distributional identities are checked by Monte Carlo: [`samplers`] draws
//! exact grid samples of Brownian motion, bridges, Bessel(3) paths and
//! meanders from splittable seeds, [`identities`] pushes both sides of each
//! identity through a fixed functional battery, and [`stats`] compares them
//! with two-sample Kolmogorov–Smirnov tests or weighted-mean z-tests.
//!
//! ```
//! use bridge_transforms::path::Path;
//! use bridge_transforms::transforms::{l_transform, pitman};
//!
//! let p = Path::uniform(3.0, vec![0.0, 1.0, -1.0, 2.0]).unwrap();
//! let pp = pitman(&p);
//! assert_eq!(pp.eval(3.0).unwrap(), 2.0);
//! let back = l_transform(&pp, p.terminal()).unwrap();
//! assert_eq!(back.eval(2.0).unwrap(), -1.0);
//! ```

pub mod csv_io;
pub mod hitting;
pub mod identities;
pub mod occupation;
pub mod params;
pub mod path;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod suite;
pub mod transforms;

pub use identities::{IdentityCase, IdentityId};
pub use params::RunParams;
pub use path::{Path, Path3};
pub use stats::VerificationReport;
