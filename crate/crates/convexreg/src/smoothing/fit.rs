//! Evaluable smoothers: Nadaraya-Watson, local polynomials, moving window.

use super::{Dataset, Kernel, SmoothingError};
use crate::geometry::Grid;
use crate::linalg;

/// Which normalization the kernel-weighted average uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NwForm {
    /// Standard ratio estimator: weights sum to one wherever any weight is
    /// positive. Default for fitting.
    Ratio,
    /// Divide by `n h^d` without normalizing by the kernel sum. This is the
    /// form the confidence-band theory is stated for; it under-shoots near
    /// the boundary where kernel mass is clipped.
    Unnormalized,
}

/// Estimator family of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmootherKind {
    NadarayaWatson { form: NwForm },
    LocalPoly { degree: usize },
    MovingWindow,
}

/// A fitted smoother: the data, a kernel, a bandwidth and the estimator kind.
/// Immutable; evaluation is pure and safe to call concurrently.
#[derive(Debug, Clone)]
pub struct SmootherFit {
    kind: SmootherKind,
    kernel: Kernel,
    bandwidth: f64,
    data: Dataset,
}

/// A single evaluation, with a flag set when a singular local system fell
/// back to the locally weighted mean.
#[derive(Debug, Clone, Copy)]
pub struct EvalPoint {
    pub value: f64,
    pub degree_fallback: bool,
}

impl SmootherFit {
    /// Kernel-weighted average of the responses.
    pub fn nadaraya_watson(
        data: Dataset,
        kernel: Kernel,
        bandwidth: f64,
        form: NwForm,
    ) -> Result<Self, SmoothingError> {
        check_bandwidth(bandwidth)?;
        Ok(SmootherFit {
            kind: SmootherKind::NadarayaWatson { form },
            kernel,
            bandwidth,
            data,
        })
    }

    /// Locally weighted polynomial fit of the given degree (1 or 2),
    /// evaluated as the intercept of the fit centered at the query point.
    pub fn local_poly(
        data: Dataset,
        kernel: Kernel,
        bandwidth: f64,
        degree: usize,
    ) -> Result<Self, SmoothingError> {
        check_bandwidth(bandwidth)?;
        if !(degree == 1 || degree == 2) {
            return Err(SmoothingError::InvalidInput(format!(
                "local polynomial degree must be 1 or 2, got {degree}"
            )));
        }
        Ok(SmootherFit {
            kind: SmootherKind::LocalPoly { degree },
            kernel,
            bandwidth,
            data,
        })
    }

    /// Unweighted mean of the responses within a closed ball of radius
    /// `bandwidth` around the query point.
    pub fn moving_window(data: Dataset, bandwidth: f64) -> Result<Self, SmoothingError> {
        check_bandwidth(bandwidth)?;
        Ok(SmootherFit {
            kind: SmootherKind::MovingWindow,
            kernel: Kernel::UniformBall,
            bandwidth,
            data,
        })
    }

    pub fn kind(&self) -> SmootherKind {
        self.kind
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, SmoothingError> {
        self.eval_detailed(x).map(|e| e.value)
    }

    pub fn eval_detailed(&self, x: &[f64]) -> Result<EvalPoint, SmoothingError> {
        self.eval_skipping(x, usize::MAX)
    }

    /// Evaluation that ignores observation `skip` (pass `usize::MAX` to use
    /// all observations). Leave-one-out cross-validation uses this to avoid
    /// rebuilding the dataset for every fold.
    pub(crate) fn eval_skipping(
        &self,
        x: &[f64],
        skip: usize,
    ) -> Result<EvalPoint, SmoothingError> {
        if x.len() != self.data.dim() {
            return Err(SmoothingError::InvalidInput(format!(
                "query dimension {} does not match data dimension {}",
                x.len(),
                self.data.dim()
            )));
        }
        match self.kind {
            SmootherKind::NadarayaWatson { form } => self.eval_nw(x, form, skip),
            SmootherKind::LocalPoly { degree } => self.eval_local_poly(x, degree, skip),
            SmootherKind::MovingWindow => self.eval_moving_window(x, skip),
        }
    }

    fn eval_nw(&self, x: &[f64], form: NwForm, skip: usize) -> Result<EvalPoint, SmoothingError> {
        let h = self.bandwidth;
        let mut num = 0.0;
        let mut den = 0.0;
        let mut scaled = vec![0.0; x.len()];
        for (i, (xi, &yi)) in self.data.xs().iter().zip(self.data.ys()).enumerate() {
            if i == skip {
                continue;
            }
            for (s, (a, b)) in scaled.iter_mut().zip(x.iter().zip(xi)) {
                *s = (a - b) / h;
            }
            match form {
                NwForm::Ratio => {
                    let w = self.kernel.weight(&scaled);
                    num += w * yi;
                    den += w;
                }
                NwForm::Unnormalized => {
                    let k: f64 = scaled.iter().map(|&u| self.kernel.density(u)).product();
                    num += k * yi;
                }
            }
        }
        match form {
            NwForm::Ratio => {
                if den > 0.0 {
                    Ok(EvalPoint {
                        value: num / den,
                        degree_fallback: false,
                    })
                } else {
                    Err(SmoothingError::EmptyWindow { point: x.to_vec() })
                }
            }
            NwForm::Unnormalized => {
                let n = if skip < self.data.len() {
                    self.data.len() - 1
                } else {
                    self.data.len()
                };
                Ok(EvalPoint {
                    value: num / (n as f64 * h.powi(x.len() as i32)),
                    degree_fallback: false,
                })
            }
        }
    }

    fn eval_local_poly(
        &self,
        x: &[f64],
        degree: usize,
        skip: usize,
    ) -> Result<EvalPoint, SmoothingError> {
        let dim = self.data.dim();
        let h = self.bandwidth;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut scaled = vec![0.0; dim];
        for (i, (xi, &yi)) in self.data.xs().iter().zip(self.data.ys()).enumerate() {
            if i == skip {
                continue;
            }
            for (s, (a, b)) in scaled.iter_mut().zip(xi.iter().zip(x)) {
                *s = (a - b) / h;
            }
            let w = self.kernel.weight(&scaled);
            if w == 0.0 {
                continue;
            }
            // Basis centered at the query point: the intercept is the value.
            let centered: Vec<f64> = xi.iter().zip(x).map(|(a, b)| a - b).collect();
            let mut row = Vec::with_capacity(poly_terms(dim, degree));
            row.push(1.0);
            row.extend_from_slice(&centered);
            if degree == 2 {
                for p in 0..dim {
                    for q in p..dim {
                        row.push(centered[p] * centered[q]);
                    }
                }
            }
            rows.push(row);
            ys.push(yi);
            weights.push(w);
        }
        if rows.is_empty() {
            return Err(SmoothingError::EmptyWindow { point: x.to_vec() });
        }
        if let Some(coef) = linalg::weighted_lstsq(&rows, &ys, &weights, 1e-10) {
            if coef[0].is_finite() {
                return Ok(EvalPoint {
                    value: coef[0],
                    degree_fallback: false,
                });
            }
        }
        // Singular local system: fall back to the weighted mean and say so.
        let wsum: f64 = weights.iter().sum();
        let value = weights.iter().zip(&ys).map(|(&w, &y)| w * y).sum::<f64>() / wsum;
        Ok(EvalPoint {
            value,
            degree_fallback: true,
        })
    }

    fn eval_moving_window(&self, x: &[f64], skip: usize) -> Result<EvalPoint, SmoothingError> {
        let h2 = self.bandwidth * self.bandwidth;
        let mut sum = 0.0;
        let mut count = 0usize;
        for (i, (xi, &yi)) in self.data.xs().iter().zip(self.data.ys()).enumerate() {
            if i == skip {
                continue;
            }
            let d2: f64 = xi.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 <= h2 {
                sum += yi;
                count += 1;
            }
        }
        if count == 0 {
            return Err(SmoothingError::EmptyWindow { point: x.to_vec() });
        }
        Ok(EvalPoint {
            value: sum / count as f64,
            degree_fallback: false,
        })
    }
}

fn check_bandwidth(h: f64) -> Result<(), SmoothingError> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(SmoothingError::InvalidBandwidth(h))
    }
}

fn poly_terms(dim: usize, degree: usize) -> usize {
    1 + dim + if degree == 2 { dim * (dim + 1) / 2 } else { 0 }
}

/// How [`sample_on_grid`] treats grid points the smoother cannot evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Any unevaluable grid point aborts with a sampling error.
    Strict,
    /// Unevaluable points are excluded and counted.
    Lenient,
}

/// Smoother values on a grid, with bookkeeping for skipped points and
/// degree fallbacks. Failures are recorded, never silently dropped.
#[derive(Debug, Clone)]
pub struct GridSamples {
    pub samples: Vec<(Vec<f64>, f64)>,
    pub skipped: usize,
    pub degree_fallbacks: usize,
}

/// Evaluate the fit at every grid point.
pub fn sample_on_grid(
    fit: &SmootherFit,
    grid: &Grid,
    mode: SamplingMode,
) -> Result<GridSamples, SmoothingError> {
    let mut out = GridSamples {
        samples: Vec::with_capacity(grid.len()),
        skipped: 0,
        degree_fallbacks: 0,
    };
    for g in grid.points() {
        match fit.eval_detailed(g) {
            Ok(e) => {
                if e.degree_fallback {
                    out.degree_fallbacks += 1;
                }
                out.samples.push((g.clone(), e.value));
            }
            Err(err) => match mode {
                SamplingMode::Strict => {
                    return Err(SmoothingError::SamplingFailed {
                        point: g.clone(),
                        source: Box::new(err),
                    })
                }
                SamplingMode::Lenient => out.skipped += 1,
            },
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_box_domain, uniform_grid};

    #[test]
    fn nw_ratio_constant_data() {
        let data = Dataset::univariate(&[0.0, 0.3, 0.6, 1.0], &[2.5; 4]).unwrap();
        let fit = SmootherFit::nadaraya_watson(data, Kernel::Gaussian, 0.2, NwForm::Ratio).unwrap();
        for x in [0.0, 0.41, 1.0] {
            assert!((fit.eval(&[x]).unwrap() - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn nw_ratio_single_point() {
        let data = Dataset::univariate(&[0.0], &[2.0]).unwrap();
        let fit = SmootherFit::nadaraya_watson(data, Kernel::Gaussian, 1.0, NwForm::Ratio).unwrap();
        assert!((fit.eval(&[0.0]).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nw_ratio_compact_window() {
        let data = Dataset::univariate(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        let fit =
            SmootherFit::nadaraya_watson(data, Kernel::UniformBall, 0.4, NwForm::Ratio).unwrap();
        // Only the first observation is within 0.4 of x = 0.1.
        assert_eq!(fit.eval(&[0.1]).unwrap(), 0.0);
    }

    #[test]
    fn nw_ratio_stays_within_response_range() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (7.3 * x).sin()).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let (lo, hi) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| {
                (l.min(y), h.max(y))
            });
        let fit =
            SmootherFit::nadaraya_watson(data, Kernel::Gaussian, 0.07, NwForm::Ratio).unwrap();
        for i in 0..=100 {
            let v = fit.eval(&[i as f64 / 100.0]).unwrap();
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn unnormalized_form_matches_direct_sum() {
        let xs = [0.1, 0.4, 0.55, 0.9];
        let ys = [1.0, -0.5, 2.0, 0.25];
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let h = 0.3;
        let fit = SmootherFit::nadaraya_watson(data, Kernel::Epanechnikov, h, NwForm::Unnormalized)
            .unwrap();
        let x = 0.5;
        let direct: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&xi, &yi)| yi * Kernel::Epanechnikov.density((x - xi) / h))
            .sum::<f64>()
            / (4.0 * h);
        assert!((fit.eval(&[x]).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn local_linear_reproduces_lines() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        for h in [0.05, 0.2, 1.0, 10.0] {
            let fit = SmootherFit::local_poly(data.clone(), Kernel::Gaussian, h, 1).unwrap();
            for x in [0.0, 0.33, 0.5, 1.0] {
                assert!(
                    (fit.eval(&[x]).unwrap() - (3.0 * x + 1.0)).abs() < 1e-8,
                    "h={h} x={x}"
                );
            }
        }
    }

    #[test]
    fn local_quadratic_reproduces_squares() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let fit = SmootherFit::local_poly(data, Kernel::Gaussian, 0.4, 2).unwrap();
        assert!((fit.eval(&[0.5]).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn local_linear_flat_bandwidth_is_ols() {
        // With near-flat weights the fit approaches the ordinary least
        // squares line; compute that line's weighted version exactly.
        let xs = [0.0, 0.5, 1.0];
        let ys = [0.0, 1.0, 0.0];
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let h = 10.0;
        let fit = SmootherFit::local_poly(data, Kernel::Gaussian, h, 1).unwrap();
        let x0 = 0.5;
        // Independent weighted least squares at x0.
        let w: Vec<f64> = xs
            .iter()
            .map(|&xi| (-0.5 * ((x0 - xi) / h).powi(2)).exp())
            .collect();
        let sw: f64 = w.iter().sum();
        let sx: f64 = w.iter().zip(&xs).map(|(&wi, &xi)| wi * (xi - x0)).sum();
        let sxx: f64 = w
            .iter()
            .zip(&xs)
            .map(|(&wi, &xi)| wi * (xi - x0) * (xi - x0))
            .sum();
        let sy: f64 = w.iter().zip(&ys).map(|(&wi, &yi)| wi * yi).sum();
        let sxy: f64 = w
            .iter()
            .zip(&xs)
            .zip(&ys)
            .map(|((&wi, &xi), &yi)| wi * (xi - x0) * yi)
            .sum();
        let expected = (sxx * sy - sx * sxy) / (sw * sxx - sx * sx);
        let got = fit.eval(&[x0]).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 1.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn local_poly_singular_falls_back() {
        // Two stacked observations cannot support a linear fit.
        let data = Dataset::univariate(&[0.5, 0.5], &[1.0, 3.0]).unwrap();
        let fit = SmootherFit::local_poly(data, Kernel::Gaussian, 0.3, 1).unwrap();
        let e = fit.eval_detailed(&[0.5]).unwrap();
        assert!(e.degree_fallback);
        assert!((e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn moving_window_examples() {
        let data = Dataset::univariate(&[0.0, 1.0], &[1.0, 3.0]).unwrap();
        let both = SmootherFit::moving_window(data.clone(), 2.0).unwrap();
        assert_eq!(both.eval(&[0.5]).unwrap(), 2.0);
        let near = SmootherFit::moving_window(data.clone(), 0.4).unwrap();
        assert_eq!(near.eval(&[0.1]).unwrap(), 1.0);
        let tiny = SmootherFit::moving_window(data, 0.05).unwrap();
        assert!(matches!(
            tiny.eval(&[0.5]),
            Err(SmoothingError::EmptyWindow { .. })
        ));
    }

    #[test]
    fn moving_window_matches_brute_force() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7919).fract()).collect();
        let ys: Vec<f64> = (0..50).map(|i| (i as f64 * 1.3371).fract() - 0.5).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let h = 0.23;
        let fit = SmootherFit::moving_window(data, h).unwrap();
        for j in 0..=20 {
            let x = j as f64 / 20.0;
            let mut sum = 0.0;
            let mut cnt = 0;
            for (xi, yi) in xs.iter().zip(&ys) {
                if (xi - x).abs() <= h {
                    sum += yi;
                    cnt += 1;
                }
            }
            if cnt > 0 {
                assert_eq!(fit.eval(&[x]).unwrap(), sum / cnt as f64);
            }
        }
    }

    #[test]
    fn invalid_bandwidth_rejected() {
        let data = Dataset::univariate(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(
            SmootherFit::moving_window(data, 0.0),
            Err(SmoothingError::InvalidBandwidth(_))
        ));
    }

    #[test]
    fn sampling_modes() {
        let data = Dataset::univariate(&[0.45, 0.55], &[1.0, 2.0]).unwrap();
        let fit = SmootherFit::moving_window(data, 0.2).unwrap();
        let q = make_box_domain(&[0.0], &[1.0]).unwrap();
        let grid = uniform_grid(&q, 5).unwrap();
        // Corner grid points have empty windows.
        assert!(matches!(
            sample_on_grid(&fit, &grid, SamplingMode::Strict),
            Err(SmoothingError::SamplingFailed { .. })
        ));
        let lenient = sample_on_grid(&fit, &grid, SamplingMode::Lenient).unwrap();
        assert_eq!(lenient.skipped, 2);
        assert_eq!(lenient.samples.len(), 3);
    }

    #[test]
    fn sampling_affine_fit_on_grid() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let fit = SmootherFit::local_poly(data, Kernel::Gaussian, 0.3, 1).unwrap();
        let q = make_box_domain(&[0.0], &[1.0]).unwrap();
        let grid = uniform_grid(&q, 3).unwrap();
        let out = sample_on_grid(&fit, &grid, SamplingMode::Strict).unwrap();
        let expect = [1.0, 2.5, 4.0];
        for ((_, v), e) in out.samples.iter().zip(expect) {
            assert!((v - e).abs() < 1e-8);
        }
    }
}
