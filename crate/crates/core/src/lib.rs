//! Room-layout estimation toolkit for equirectangular panoramas.
//!
//! The crate covers the geometry of the horizon-depth boundary
//! representation ([`geometry`]), the per-sample training objective
//! ([`objectives`]), two label-preserving augmentations ([`avg`] restyles
//! feature statistics, [`csmix`] exchanges column windows between rooms),
//! layout metrics ([`metrics`]), imbalance-aware grouping ([`imbalance`]),
//! a procedural room generator ([`synthgen`]) and file formats ([`io`]).
//!
//! ```
//! use layoutforge::geometry::{sample_longitudes, visible_boundary, LayoutAnnotation, PoseLabel};
//!
//! let room = LayoutAnnotation::new(
//!     "square",
//!     vec![[-2.0, -2.0], [-2.0, 2.0], [2.0, 2.0], [2.0, -2.0]],
//!     1.6,
//!     2.8,
//!     PoseLabel::Primary,
//! )?;
//! let grid = sample_longitudes(256)?;
//! let (depths, heights) = visible_boundary(&room, &grid)?;
//! assert!(depths.values().iter().all(|d| (2.0..=2.0 * 2f64.sqrt() + 1e-9).contains(d)));
//! assert!(heights.values().iter().all(|h| *h == 2.8));
//! # Ok::<(), layoutforge::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod avg;
pub mod csmix;
mod error;
pub mod geometry;
pub mod imbalance;
pub mod io;
pub mod metrics;
pub mod objectives;
pub mod polygon;
pub mod synthgen;

pub use error::{Error, Result};
