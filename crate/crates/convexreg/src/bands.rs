//! Uniform confidence bands for one-dimensional designs.
//!
//! The centers come from the unnormalized kernel estimator
//! `f_n(x) = (n h)^{-1} sum_i Y_i K((x - X_i)/h)` with `h = n^{-delta}`,
//! `1/5 < delta < 1/3`, and a compactly supported kernel. The half-width at
//! `x` is `r_n(x) (d_n + c(alpha) (2 delta log n)^{-1/2})` with
//! `r_n^2(x) = int K^2 du * E[Y^2 | X = x] / (n h)`. The same half-widths
//! apply around the convexified centers; the band is then valid for the
//! convex estimate as well, just not with an optimal constant.

use crate::smoothing::{Dataset, Kernel, NwForm, SmootherFit, SmoothingError};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BandError {
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("delta exponent must lie strictly inside (1/5, 1/3), got {0}")]
    InvalidDelta(f64),
    #[error("band kernel must have compact support, got {0}")]
    NonCompactKernel(&'static str),
    #[error("bands are only available for one-dimensional designs, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("smoothing failed: {0}")]
    Smoothing(#[from] SmoothingError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Estimator of the conditional second moment `E[Y^2 | X = x]`.
#[derive(Clone)]
pub enum SecondMoment {
    /// Ratio-form kernel regression of `y_i^2` with the band's own kernel
    /// and bandwidth.
    PlugIn,
    /// User-supplied function.
    Supplied(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for SecondMoment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SecondMoment::PlugIn => f.write_str("PlugIn"),
            SecondMoment::Supplied(_) => f.write_str("Supplied(..)"),
        }
    }
}

/// Band configuration.
#[derive(Debug, Clone)]
pub struct BandConfig {
    pub alpha: f64,
    /// Bandwidth exponent: `h_n = n^{-delta}`.
    pub delta_exponent: f64,
    pub kernel: Kernel,
    pub second_moment: SecondMoment,
    /// Additive correction `kappa` in
    /// `d_n = (2 delta log n)^{1/2} + kappa (2 delta log n)^{-1/2}`.
    /// The theory fixes only the leading order of `d_n`; zero keeps the pure
    /// leading term and the chosen value is recorded in the output.
    pub drift_correction: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        BandConfig {
            alpha: 0.05,
            delta_exponent: 0.3,
            kernel: Kernel::Epanechnikov,
            second_moment: SecondMoment::PlugIn,
            drift_correction: 0.0,
        }
    }
}

impl BandConfig {
    fn validate(&self) -> Result<(), BandError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(BandError::InvalidAlpha(self.alpha));
        }
        if !(self.delta_exponent > 0.2 && self.delta_exponent < 1.0 / 3.0) {
            return Err(BandError::InvalidDelta(self.delta_exponent));
        }
        if !self.kernel.is_compact() {
            return Err(BandError::NonCompactKernel(self.kernel.name()));
        }
        Ok(())
    }
}

/// Critical constant `c(alpha) = log 2 - log |log(1 - alpha)|`.
pub fn critical_constant(alpha: f64) -> Result<f64, BandError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(BandError::InvalidAlpha(alpha));
    }
    Ok(2.0f64.ln() - (1.0 - alpha).ln().abs().ln())
}

/// Drift constant `d_n = (2 delta log n)^{1/2} + kappa (2 delta log n)^{-1/2}`
/// (`n >= 2`).
pub fn drift_constant(n: usize, delta_exponent: f64, correction: f64) -> f64 {
    let lead = (2.0 * delta_exponent * (n as f64).ln()).sqrt();
    lead + correction / lead
}

/// Constants that, with the per-point `r_n`, reproduce the half-widths.
#[derive(Debug, Clone)]
pub struct BandConstants {
    pub alpha: f64,
    pub c_alpha: f64,
    pub delta_exponent: f64,
    pub d_n: f64,
    pub drift_correction: f64,
    pub n: usize,
    pub bandwidth: f64,
    pub kernel: Kernel,
    pub kernel_squared_integral: f64,
}

impl BandConstants {
    /// The x-independent multiplier: `d_n + c(alpha) (2 delta log n)^{-1/2}`.
    pub fn width_multiplier(&self) -> f64 {
        self.d_n + self.c_alpha / (2.0 * self.delta_exponent * (self.n as f64).ln()).sqrt()
    }
}

/// A pointwise confidence band on an evaluation grid.
#[derive(Debug, Clone)]
pub struct BandEstimate {
    pub xs: Vec<f64>,
    pub centers: Vec<f64>,
    /// `r_n(x)` per grid point.
    pub rn: Vec<f64>,
    /// `r_n(x) * width_multiplier()` per grid point.
    pub halfwidths: Vec<f64>,
    /// Points within one kernel support radius times the bandwidth of the
    /// design boundary, where the unnormalized estimator under-shoots.
    pub near_boundary: Vec<bool>,
    pub constants: BandConstants,
}

impl BandEstimate {
    /// Same half-widths around different centers (e.g. the convexified
    /// estimate evaluated on the band's grid).
    pub fn with_centers(mut self, centers: Vec<f64>) -> Result<Self, BandError> {
        if centers.len() != self.xs.len() {
            return Err(BandError::InvalidInput(format!(
                "{} centers for {} grid points",
                centers.len(),
                self.xs.len()
            )));
        }
        self.centers = centers;
        Ok(self)
    }

    pub fn lower(&self) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.halfwidths)
            .map(|(c, w)| c - w)
            .collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.centers
            .iter()
            .zip(&self.halfwidths)
            .map(|(c, w)| c + w)
            .collect()
    }

    /// Overall width: twice the mean half-width.
    pub fn mean_width(&self) -> f64 {
        2.0 * self.halfwidths.iter().sum::<f64>() / self.halfwidths.len() as f64
    }
}

/// The unnormalized-form smoother the band is built around.
pub fn band_smoother(data: &Dataset, config: &BandConfig) -> Result<SmootherFit, BandError> {
    config.validate()?;
    if data.dim() != 1 {
        return Err(BandError::UnsupportedDimension(data.dim()));
    }
    let h = (data.len() as f64).powf(-config.delta_exponent);
    Ok(SmootherFit::nadaraya_watson(
        data.clone(),
        config.kernel,
        h,
        NwForm::Unnormalized,
    )?)
}

/// Confidence band on `eval_xs` around the unnormalized-form kernel estimator.
pub fn confidence_band(
    data: &Dataset,
    config: &BandConfig,
    eval_xs: &[f64],
) -> Result<BandEstimate, BandError> {
    config.validate()?;
    if data.dim() != 1 {
        return Err(BandError::UnsupportedDimension(data.dim()));
    }
    if data.is_empty() || eval_xs.is_empty() {
        return Err(BandError::InvalidInput(
            "data and evaluation grid must be nonempty".into(),
        ));
    }
    let n = data.len();
    let h = (n as f64).powf(-config.delta_exponent);
    let smoother = band_smoother(data, config)?;
    // Plug-in second moment: ratio-form estimate of y^2 with the same
    // kernel and bandwidth.
    let second_moment_fit = match &config.second_moment {
        SecondMoment::PlugIn => {
            let ysq: Vec<f64> = data.ys().iter().map(|y| y * y).collect();
            let sq_data = Dataset::new(data.xs().to_vec(), ysq)?;
            Some(SmootherFit::nadaraya_watson(
                sq_data,
                config.kernel,
                h,
                NwForm::Ratio,
            )?)
        }
        SecondMoment::Supplied(_) => None,
    };

    let c_alpha = critical_constant(config.alpha)?;
    let d_n = drift_constant(n, config.delta_exponent, config.drift_correction);
    let constants = BandConstants {
        alpha: config.alpha,
        c_alpha,
        delta_exponent: config.delta_exponent,
        d_n,
        drift_correction: config.drift_correction,
        n,
        bandwidth: h,
        kernel: config.kernel,
        kernel_squared_integral: config.kernel.squared_integral(),
    };
    let multiplier = constants.width_multiplier();
    let (lo, hi) = data.bounding_box();
    let edge = config.kernel.support_radius() * h;

    let mut centers = Vec::with_capacity(eval_xs.len());
    let mut rn = Vec::with_capacity(eval_xs.len());
    let mut halfwidths = Vec::with_capacity(eval_xs.len());
    let mut near_boundary = Vec::with_capacity(eval_xs.len());
    for &x in eval_xs {
        centers.push(smoother.eval(&[x])?);
        let m2 = match (&config.second_moment, &second_moment_fit) {
            (SecondMoment::Supplied(f), _) => f(x),
            (SecondMoment::PlugIn, Some(fit)) => fit.eval(&[x])?,
            _ => unreachable!(),
        };
        let r = (constants.kernel_squared_integral * m2.max(0.0) / (n as f64 * h)).sqrt();
        rn.push(r);
        halfwidths.push(r * multiplier);
        near_boundary.push(x - lo[0] < edge || hi[0] - x < edge);
    }
    Ok(BandEstimate {
        xs: eval_xs.to_vec(),
        centers,
        rn,
        halfwidths,
        near_boundary,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_constant_examples() {
        // log 2 - log |log 0.95|
        let c = critical_constant(0.05).unwrap();
        let independent = 2.0f64.ln() - (0.95f64.ln().abs().ln());
        assert!((c - independent).abs() < 1e-15);
        assert!((c - 3.6633).abs() < 5e-4);
        // alpha = 0.5: |log(1 - alpha)| = log 2, so c = log 2 - log(log 2)
        let c5 = critical_constant(0.5).unwrap();
        assert!((c5 - (2.0f64.ln() - 2.0f64.ln().ln())).abs() < 1e-15);
        assert!((c5 - 1.0596).abs() < 5e-4);
        assert!(matches!(
            critical_constant(0.0),
            Err(BandError::InvalidAlpha(_))
        ));
        assert!(matches!(
            critical_constant(1.0),
            Err(BandError::InvalidAlpha(_))
        ));
    }

    #[test]
    fn drift_constant_examples() {
        let d = drift_constant(100, 0.3, 0.0);
        assert!((d - (0.6 * 100.0f64.ln()).sqrt()).abs() < 1e-15);
        assert!((d - 1.6623).abs() < 5e-4);
        // Correction enters exactly as kappa / leading term.
        let kappa = 0.7;
        let lead = (0.6 * 100.0f64.ln()).sqrt();
        assert_eq!(drift_constant(100, 0.3, kappa), lead + kappa / lead);
        // Monotone in n.
        assert!(drift_constant(1000, 0.3, 0.0) > drift_constant(100, 0.3, 0.0));
    }

    fn uniform_design(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn constant_data_halfwidth_closed_form() {
        let n = 100;
        let xs = uniform_design(n);
        let ys = vec![1.0; n];
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let config = BandConfig::default();
        let eval: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let band = confidence_band(&data, &config, &eval).unwrap();
        let h = (n as f64).powf(-0.3);
        let expected = (0.6 / (n as f64 * h)).sqrt() * band.constants.width_multiplier();
        // The plug-in estimate of E[Y^2|X=x] for y = 1 is exactly 1 wherever
        // the window is nonempty, so every half-width matches the closed form.
        for (&w, &x) in band.halfwidths.iter().zip(&eval) {
            assert!((w - expected).abs() < 1e-12, "x={x}: {w} vs {expected}");
        }
    }

    #[test]
    fn halfwidths_recompute_from_constants() {
        let xs = uniform_design(150);
        let ys: Vec<f64> = xs.iter().map(|x| (x - 0.25) * (x - 0.25)).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let eval: Vec<f64> = (0..=50).map(|k| k as f64 / 50.0).collect();
        let band = confidence_band(&data, &BandConfig::default(), &eval).unwrap();
        let mult = band.constants.width_multiplier();
        for (w, r) in band.halfwidths.iter().zip(&band.rn) {
            assert_eq!(*w, r * mult);
        }
        assert!(band.halfwidths.iter().all(|w| *w > 0.0));
        // Endpoint flagging: within one support radius times the bandwidth.
        let h = band.constants.bandwidth;
        for (&x, &near) in band.xs.iter().zip(&band.near_boundary) {
            let lo = *data
                .xs()
                .iter()
                .map(|v| &v[0])
                .min_by(|a, b| a.total_cmp(b))
                .unwrap();
            let hi = *data
                .xs()
                .iter()
                .map(|v| &v[0])
                .max_by(|a, b| a.total_cmp(b))
                .unwrap();
            assert_eq!(near, x - lo < h || hi - x < h, "x={x}");
        }
    }

    #[test]
    fn doubling_second_moment_scales_by_sqrt2() {
        let xs = uniform_design(80);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let eval: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let base = BandConfig {
            second_moment: SecondMoment::Supplied(Arc::new(|_| 1.0)),
            ..BandConfig::default()
        };
        let doubled = BandConfig {
            second_moment: SecondMoment::Supplied(Arc::new(|_| 2.0)),
            ..BandConfig::default()
        };
        let b1 = confidence_band(&data, &base, &eval).unwrap();
        let b2 = confidence_band(&data, &doubled, &eval).unwrap();
        for (w1, w2) in b1.halfwidths.iter().zip(&b2.halfwidths) {
            assert!((w2 / w1 - 2.0f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn smaller_alpha_widens_band() {
        let xs = uniform_design(90);
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let eval: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let b05 = confidence_band(&data, &BandConfig::default(), &eval).unwrap();
        let b01 = confidence_band(
            &data,
            &BandConfig {
                alpha: 0.01,
                ..BandConfig::default()
            },
            &eval,
        )
        .unwrap();
        for (w5, w1) in b05.halfwidths.iter().zip(&b01.halfwidths) {
            assert!(w1 > w5);
        }
    }

    #[test]
    fn config_validation() {
        let xs = uniform_design(10);
        let data = Dataset::univariate(&xs, &[0.0; 10]).unwrap();
        let eval = [0.5];
        for bad in [
            BandConfig {
                alpha: 0.0,
                ..BandConfig::default()
            },
            BandConfig {
                delta_exponent: 0.4,
                ..BandConfig::default()
            },
            BandConfig {
                kernel: Kernel::Gaussian,
                ..BandConfig::default()
            },
        ] {
            assert!(confidence_band(&data, &bad, &eval).is_err());
        }
        // Two-dimensional designs are unsupported.
        let data2 = Dataset::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            confidence_band(&data2, &BandConfig::default(), &eval),
            Err(BandError::UnsupportedDimension(2))
        ));
    }
}
