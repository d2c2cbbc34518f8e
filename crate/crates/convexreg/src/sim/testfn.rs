//! The benchmark regression functions used throughout the studies.

use super::SimError;

/// Convex benchmark regression functions with known Lipschitz constants:
/// an exponential, a parabola, a piecewise-linear vee with a flat middle,
/// and a two-dimensional max of a quadratic and a plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    F1,
    F2,
    F3,
    F2d,
}

impl TestFunction {
    pub fn from_name(name: &str) -> Result<Self, SimError> {
        match name {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            "f3" => Ok(TestFunction::F3),
            "f2d" => Ok(TestFunction::F2d),
            other => Err(SimError::InvalidSpec(format!(
                "unknown test function '{other}' (expected f1 | f2 | f3 | f2d)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
            TestFunction::F3 => "f3",
            TestFunction::F2d => "f2d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::F2d => 2,
            _ => 1,
        }
    }

    /// Domain box of the studies: the unit interval in dimension one, and
    /// `[-1, 1]^2` for the two-dimensional function so that the curve where
    /// its two branches meet (it is convex but only Lipschitz there) crosses
    /// the domain instead of only touching it at a corner.
    pub fn domain_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            TestFunction::F2d => (vec![-1.0, -1.0], vec![1.0, 1.0]),
            _ => (vec![0.0], vec![1.0]),
        }
    }

    /// Lipschitz constant on the unit box, from the maximal gradient norm:
    /// 3 for the exponential at x = 1, 8/3 for the parabola at x = 1, 4 for
    /// the vee's outer slopes, sqrt(17) for the 2-d max at (1, 1).
    pub fn lipschitz(&self) -> f64 {
        match self {
            TestFunction::F1 => 3.0,
            TestFunction::F2 => 8.0 / 3.0,
            TestFunction::F3 => 4.0,
            TestFunction::F2d => 17.0f64.sqrt(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::F1 => (3.0 * (x[0] - 1.0)).exp(),
            TestFunction::F2 => {
                let t = x[0] - 0.25;
                16.0 / 9.0 * t * t
            }
            TestFunction::F3 => {
                let t = x[0];
                if t <= 0.25 {
                    -4.0 * t + 1.0
                } else if t < 0.75 {
                    0.0
                } else {
                    4.0 * t - 3.0
                }
            }
            TestFunction::F2d => {
                let quad = 2.0 * x[0] * x[0] + 0.5 * x[1] * x[1];
                let plane = 3.0 * x[0] + x[1];
                quad.max(plane)
            }
        }
    }
}
