//! Contracting-boundary experiments on concrete proper geodesic spaces.
//!
//! Two families of spaces are implemented:
//!
//! - **Ray complexes** ([`complex`]): finite gluings of rays and segments with
//!   exact rational lengths. Distances, geodesics, projections and Gromov
//!   products are computed in exact arithmetic.
//! - **The punctured-plane cover** ([`annulus`]): the universal cover of the
//!   Euclidean plane minus the open unit disk, in coordinates `(t, r)`, with
//!   optional rays wedged on at single points. Distances use a closed-form
//!   kernel validated against a grid-Dijkstra oracle.
//!
//! On top of these, [`contraction`] measures closest-point projections and
//! contraction gauges, and [`boundary`] estimates Gromov products of boundary
//! points, `U(eta, r)` neighbourhoods, convergence and continuity of boundary
//! maps induced by quasi-isometries. [`zoo`] builds the example spaces and
//! parses the `.space` description language.

pub mod annulus;
pub mod boundary;
pub mod complex;
pub mod contraction;
pub mod distortion;
pub mod error;
pub mod metric;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod suite;
pub mod zoo;

mod cli;
mod minimize;

pub use cli::run as run_cli;
pub use error::{Error, Result};
pub use metric::{gromov_product, MetricSpace, PathPolyline, Point, SpaceId, UnitSpeedRay};
pub use scalar::{Scalar, Q};
