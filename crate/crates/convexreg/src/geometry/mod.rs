//! Polyhedral domains, covering grids, and piecewise-linear convex envelopes.
//!
//! The convexification step lifts sampled values to one extra dimension,
//! takes the lower part of the convex hull, and reads each lower facet back
//! as an affine piece `a . x + b`. The envelope is the pointwise max of those
//! pieces, which is the largest convex function dominated by the samples.

mod domain;
mod envelope;
mod grid;
mod hull;
mod oracle;

pub use domain::{make_box_domain, PolyhedralDomain};
pub(crate) use envelope::{envelope_json, EnvelopeJson};
pub use envelope::{AffinePiece, ConvexEnvelope};
pub use grid::{convex_combination_cover, lattice_over, uniform_grid, Grid};
pub use hull::{lower_hull, lower_hull_on};
pub use oracle::envelope_oracle;

use thiserror::Error;

/// Errors from domain construction, grids, and hull computations.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point {point:?} is outside the domain")]
    OutOfDomain { point: Vec<f64> },
}

/// Absolute/relative tolerance pair used by containment and membership checks.
///
/// Defaults are absolute (`1e-9`) because the supported problems live in
/// order-one boxes; set `rel` to scale with the data instead.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-9,
            rel: 0.0,
        }
    }
}

impl Tolerance {
    /// Effective tolerance at a given magnitude scale.
    pub fn at(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
