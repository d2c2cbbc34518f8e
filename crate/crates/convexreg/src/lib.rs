//! Shape-constrained nonparametric regression by convexification.
//!
//! The estimator is built in three steps: smooth the observations with any
//! regression estimator, sample the smoother on a finite grid covering the
//! domain, and replace it by the lower convex envelope of those samples.
//! The envelope is a finite max of affine pieces, so the result is convex
//! by construction and cheap to evaluate anywhere.
//!
//! Modules:
//! - [`geometry`]: polyhedral domains, covering grids, lower convex hulls and
//!   piecewise-linear envelopes.
//! - [`smoothing`]: kernel, local-polynomial and moving-window smoothers with
//!   leave-one-out bandwidth selection.
//! - [`pipeline`]: the end-to-end fit (convex or concave) plus error-bound
//!   diagnostics and an empirical convergence-rate check.
//! - [`bands`]: uniform confidence bands around the smoothed or convexified
//!   curve (one-dimensional designs).
//! - [`sim`]: the Monte Carlo harness (test functions, replication engine,
//!   variance/bias^2/MSE surfaces, figure-data reproduction).

pub mod bands;
pub mod geometry;
mod linalg;
pub mod pipeline;
pub mod rng;
pub mod sim;
pub mod smoothing;

pub use geometry::{
    envelope_oracle, lower_hull, make_box_domain, uniform_grid, AffinePiece, ConvexEnvelope,
    GeometryError, Grid, PolyhedralDomain, Tolerance,
};
pub use smoothing::{
    cross_validate_bandwidth, moving_window_bandwidth, Dataset, Kernel, NwForm, SamplingMode,
    SmootherFit, SmoothingError,
};
