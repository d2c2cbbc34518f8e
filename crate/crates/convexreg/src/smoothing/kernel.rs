//! Smoothing kernels and their constants.

use super::SmoothingError;
use serde::{Deserialize, Serialize};

/// Kernel family, referenced by name in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Gaussian,
    Epanechnikov,
    UniformBall,
}

impl Kernel {
    pub fn from_name(name: &str) -> Result<Self, SmoothingError> {
        match name {
            "gaussian" => Ok(Kernel::Gaussian),
            "epanechnikov" => Ok(Kernel::Epanechnikov),
            "uniform-ball" => Ok(Kernel::UniformBall),
            other => Err(SmoothingError::InvalidInput(format!(
                "unknown kernel '{other}' (expected gaussian | epanechnikov | uniform-ball)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::UniformBall => "uniform-ball",
        }
    }

    /// Support radius `A`: the kernel vanishes for `|u| > A`.
    pub fn support_radius(&self) -> f64 {
        match self {
            Kernel::Gaussian => f64::INFINITY,
            Kernel::Epanechnikov | Kernel::UniformBall => 1.0,
        }
    }

    /// Whether the kernel has compact support (required by the band theory).
    pub fn is_compact(&self) -> bool {
        self.support_radius().is_finite()
    }

    /// One-dimensional density value at `u`.
    pub fn density(&self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            Kernel::Epanechnikov => {
                if u.abs() <= 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            Kernel::UniformBall => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// `int K(u)^2 du` over the line, used by the band half-width formula.
    pub fn squared_integral(&self) -> f64 {
        match self {
            // 1 / (2 sqrt(pi))
            Kernel::Gaussian => 0.5 / std::f64::consts::PI.sqrt(),
            // 9/16 * 16/15
            Kernel::Epanechnikov => 0.6,
            // (1/2)^2 * 2
            Kernel::UniformBall => 0.5,
        }
    }

    /// Unnormalized weight for a d-dimensional scaled offset `u = (x - X_i)/h`.
    /// Radial in the Euclidean norm; for the Gaussian this coincides with the
    /// isotropic product kernel.
    pub fn weight(&self, u: &[f64]) -> f64 {
        let r2: f64 = u.iter().map(|c| c * c).sum();
        match self {
            Kernel::Gaussian => (-0.5 * r2).exp(),
            Kernel::Epanechnikov => {
                if r2 <= 1.0 {
                    1.0 - r2
                } else {
                    0.0
                }
            }
            Kernel::UniformBall => {
                if r2 <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
