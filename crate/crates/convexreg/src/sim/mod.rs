//! Monte Carlo harness for the simulation studies.

mod figures;
mod study;
mod testfn;

pub use figures::{reproduce_figure, write_atomic, FigureOptions, StudyId};
pub(crate) use study::unit_box;
pub use study::{
    moment_study, moment_study_with_smoother, simulate_dataset, Design, MomentSurface, SimSpec,
};
pub use testfn::TestFunction;

use crate::bands::BandError;
use crate::pipeline::PipelineError;
use thiserror::Error;

/// Errors from study specification and execution.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid study spec: {0}")]
    InvalidSpec(String),
    #[error("replication {index} failed: {source}")]
    ReplicationFailed {
        index: usize,
        #[source]
        source: PipelineError,
    },
    #[error(transparent)]
    Fit(#[from] PipelineError),
    #[error(transparent)]
    Band(#[from] BandError),
    #[error("unknown study '{0}'")]
    UnknownStudy(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
