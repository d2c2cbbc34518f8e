//! Smoothers for the first stage of the fit: Nadaraya-Watson, local
//! polynomials, and the moving-window average, plus leave-one-out
//! cross-validation for the bandwidth.

mod bandwidth;
mod dataset;
mod fit;
mod kernel;

pub use bandwidth::{
    cross_validate_bandwidth, cross_validate_scores, default_bandwidth_candidates,
    moving_window_bandwidth, CvSmoother,
};
pub use dataset::Dataset;
pub use fit::{
    sample_on_grid, EvalPoint, GridSamples, NwForm, SamplingMode, SmootherFit, SmootherKind,
};
pub use kernel::Kernel;

use thiserror::Error;

/// Errors from smoother construction, evaluation and bandwidth selection.
#[derive(Debug, Error)]
pub enum SmoothingError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
    #[error("empty window at {point:?}: no observation within reach")]
    EmptyWindow { point: Vec<f64> },
    #[error("bandwidth selection failed: {0}")]
    BandwidthSelection(String),
    #[error("sampling failed at grid point {point:?}: {source}")]
    SamplingFailed {
        point: Vec<f64>,
        source: Box<SmoothingError>,
    },
}
