//! Error taxonomy with stable exit codes, one category per failure class.

use convexreg::bands::BandError;
use convexreg::pipeline::PipelineError;
use convexreg::sim::SimError;
use convexreg::{GeometryError, SmoothingError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Geometry(#[from] GeometryError),
    #[error("{0}")]
    Smoothing(#[from] SmoothingError),
    #[error("{0}")]
    Bands(#[from] BandError),
    #[error("{0}")]
    Sim(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Geometry(_) => "geometry",
            CliError::Smoothing(_) => "smoothing",
            CliError::Bands(_) => "bands",
            CliError::Sim(_) => "simulation",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Geometry(_) => 4,
            CliError::Smoothing(_) => 5,
            CliError::Bands(_) => 6,
            CliError::Sim(_) => 7,
            CliError::Io(_) => 8,
        }
    }

    /// The single-line machine-readable form printed to stderr.
    pub fn render(&self) -> String {
        format!(
            "error: category={} message={:?}",
            self.category(),
            self.to_string()
        )
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::InvalidConfig(msg) => CliError::Usage(msg),
            PipelineError::Smoothing(s) | PipelineError::Sampling(s) => CliError::Smoothing(s),
            PipelineError::Convexification(g) => CliError::Geometry(g),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownStudy(s) => {
                CliError::Usage(format!("unknown study '{s}' (regression1d | varbiasmse1d | confidence | regression2d | varbiasmse2d)"))
            }
            SimError::InvalidSpec(s) => CliError::Usage(s),
            SimError::Io(e) => CliError::Io(e),
            SimError::Band(b) => CliError::Bands(b),
            other => CliError::Sim(other.to_string()),
        }
    }
}
