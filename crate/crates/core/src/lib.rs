//! Exact arithmetic and Monte Carlo tools for the homogeneous subtractive
//! maps `T_{a,b}`, their projections `S_{a,b}` and the variants that
//! subtract an earlier coordinate.
//!
//! Modules:
//! - [`exact`]: points, maps, shuffles and region predicates.
//! - [`matrices`]: forward and inverse branch matrices and their products.
//! - [`cones`]: the three-dimensional simplicial cone subdivision with exact
//!   areas.
//! - [`return_map`]: the conditioned first-return map, cylinder codes and the
//!   projected action on the simplex.
//! - [`orbit`]: orbit iteration, closed-form limits and the experiments.
//! - [`sample`]: reproducible dyadic sampling.
//!
//! ```
//! use sublab::orbit::{iterate, IterateOptions, StopReason};
//! use sublab::{MapParams, OrderedPoint};
//!
//! let p = MapParams::new(2, 3)?;
//! let x = OrderedPoint::new(vec![1i128, 2, 5, 9, 14])?;
//! let s = iterate(&x, p, &IterateOptions::default())?;
//! assert_eq!(s.stop_reason, StopReason::FixedPoint);
//! # Ok::<(), sublab::Error>(())
//! ```

pub mod cones;
pub mod error;
pub mod exact;
pub mod matrices;
pub mod orbit;
pub mod return_map;
pub mod sample;
pub mod scalar;

pub use error::{Error, Result};
pub use exact::{FreePoint, MapParams, OrderedPoint, Shuffle};
pub use scalar::{Scalar, Q};
