//! Observation container for the regression model `y_i = f(x_i) + e_i`.

use super::SmoothingError;
use crate::geometry::PolyhedralDomain;

/// `n` observations with `d`-dimensional predictors.
#[derive(Debug, Clone)]
pub struct Dataset {
    dim: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    domain: Option<PolyhedralDomain>,
}

impl Dataset {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self, SmoothingError> {
        let dim = xs.first().map_or(0, Vec::len);
        if xs.is_empty() || dim == 0 {
            return Err(SmoothingError::InvalidInput(
                "dataset needs at least one observation".into(),
            ));
        }
        if xs.len() != ys.len() {
            return Err(SmoothingError::InvalidInput(format!(
                "{} predictors vs {} responses",
                xs.len(),
                ys.len()
            )));
        }
        for (i, x) in xs.iter().enumerate() {
            if x.len() != dim {
                return Err(SmoothingError::InvalidInput(format!(
                    "observation {i} has dimension {} instead of {dim}",
                    x.len()
                )));
            }
            if x.iter().any(|c| !c.is_finite()) || !ys[i].is_finite() {
                return Err(SmoothingError::InvalidInput(format!(
                    "observation {i} is not finite"
                )));
            }
        }
        Ok(Dataset {
            dim,
            xs,
            ys,
            domain: None,
        })
    }

    /// Attach the domain the predictors live on (defaults to none; callers
    /// fall back to the bounding box of the predictors).
    pub fn with_domain(mut self, domain: PolyhedralDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    /// One-dimensional convenience constructor.
    pub fn univariate(xs: &[f64], ys: &[f64]) -> Result<Self, SmoothingError> {
        Dataset::new(xs.iter().map(|&x| vec![x]).collect(), ys.to_vec())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> Option<&PolyhedralDomain> {
        self.domain.as_ref()
    }

    /// Dataset with the responses negated (used by concave fits).
    pub fn negated(&self) -> Dataset {
        Dataset {
            dim: self.dim,
            xs: self.xs.clone(),
            ys: self.ys.iter().map(|y| -y).collect(),
            domain: self.domain.clone(),
        }
    }

    /// Axis-aligned bounding box of the predictors.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lower = self.xs[0].clone();
        let mut upper = self.xs[0].clone();
        for x in &self.xs[1..] {
            for k in 0..self.dim {
                lower[k] = lower[k].min(x[k]);
                upper[k] = upper[k].max(x[k]);
            }
        }
        (lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(Dataset::new(vec![vec![0.0], vec![1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Dataset::univariate(&[0.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(Dataset::univariate(&[0.0, 1.0], &[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn bounding_box_covers_points() {
        let d = Dataset::new(
            vec![vec![0.0, 2.0], vec![1.0, -1.0], vec![0.5, 0.0]],
            vec![0.0, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(d.bounding_box(), (vec![0.0, -1.0], vec![1.0, 2.0]));
    }
}
