//! The end-to-end fit: smooth, sample on a grid, convexify.

use crate::geometry::{
    envelope_json, lower_hull_on, uniform_grid, ConvexEnvelope, GeometryError, Grid,
    PolyhedralDomain,
};
use crate::rng::replication_rng;
use crate::smoothing::{
    cross_validate_bandwidth, moving_window_bandwidth, sample_on_grid, CvSmoother, Dataset,
    GridSamples, Kernel, SmootherFit, SmoothingError,
};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

pub use crate::smoothing::{NwForm, SamplingMode};

/// Errors from [`fit_convex`], attributed to the step that failed.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("smoothing step failed: {0}")]
    Smoothing(#[source] SmoothingError),
    #[error("grid sampling step failed: {0}")]
    Sampling(#[source] SmoothingError),
    #[error("convexification step failed: {0}")]
    Convexification(#[source] GeometryError),
}

/// Bandwidth choice for the smoothing step.
#[derive(Debug, Clone)]
pub enum Bandwidth {
    Fixed(f64),
    /// Leave-one-out cross-validation over the given candidates, or over the
    /// default log-spaced grid when `None`.
    CrossValidated(Option<Vec<f64>>),
    /// The moving-window schedule `(log n / n)^{1/(d+2)}`, scaled.
    MovingWindowSchedule {
        scale: f64,
    },
}

/// Smoother specification for the smoothing step.
#[derive(Debug, Clone)]
pub enum SmootherSpec {
    NadarayaWatson {
        kernel: Kernel,
        bandwidth: Bandwidth,
        form: NwForm,
    },
    LocalPoly {
        kernel: Kernel,
        degree: usize,
        bandwidth: Bandwidth,
    },
    MovingWindow {
        bandwidth: Bandwidth,
    },
}

/// Grid specification for the convexification step.
#[derive(Debug, Clone)]
pub enum GridSpec {
    /// Uniform lattice with this many points per axis over the domain box.
    PerAxis(usize),
    /// Explicit grid points with a stated mesh.
    Explicit { points: Vec<Vec<f64>>, mesh: f64 },
}

/// Whether the fitted shape constraint is convex or concave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Convex,
    Concave,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Convex => "convex",
            Shape::Concave => "concave",
        }
    }
}

/// Configuration of the three-step fit.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub smoother: SmootherSpec,
    pub grid: GridSpec,
    pub shape: Shape,
    /// Domain the estimate lives on; defaults to the bounding box of the
    /// predictors when absent (and to the dataset's own domain if it has one).
    pub domain: Option<PolyhedralDomain>,
    pub sampling: SamplingMode,
}

impl PipelineConfig {
    /// Local-linear Gaussian smoother with cross-validated bandwidth, a
    /// 100-point-per-axis grid, convex shape, strict sampling.
    pub fn default_convex() -> Self {
        PipelineConfig {
            smoother: SmootherSpec::LocalPoly {
                kernel: Kernel::Gaussian,
                degree: 1,
                bandwidth: Bandwidth::CrossValidated(None),
            },
            grid: GridSpec::PerAxis(100),
            shape: Shape::Convex,
            domain: None,
            sampling: SamplingMode::Strict,
        }
    }
}

/// A fitted shape-constrained estimate. Internally always the convex
/// envelope of the (possibly negated) smoothed values; concave fits negate
/// on evaluation.
#[derive(Debug, Clone)]
pub struct FittedEnvelope {
    envelope: ConvexEnvelope,
    shape: Shape,
    /// Smoother diagnostics from the grid-sampling step.
    pub skipped_grid_points: usize,
    pub degree_fallbacks: usize,
    /// Bandwidth actually used (after cross-validation resolves).
    pub bandwidth: f64,
}

impl FittedEnvelope {
    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// The canonical convex envelope (of the negated data for concave fits).
    pub fn envelope(&self) -> &ConvexEnvelope {
        &self.envelope
    }

    pub fn domain(&self) -> &PolyhedralDomain {
        self.envelope.domain()
    }

    /// Estimate at `x`. For concave fits this is the negated envelope value.
    pub fn eval(&self, x: &[f64], extend: bool) -> Result<f64, GeometryError> {
        let v = self.envelope.evaluate(x, extend)?;
        Ok(match self.shape {
            Shape::Convex => v,
            Shape::Concave => -v,
        })
    }

    pub fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let v = self.envelope.eval_unchecked(x);
        match self.shape {
            Shape::Convex => v,
            Shape::Concave => -v,
        }
    }

    /// Envelope JSON with a trailing `"shape":"concave"` marker for concave
    /// fits; pieces always describe the underlying convex problem.
    pub fn to_json(&self) -> String {
        match self.shape {
            Shape::Convex => envelope_json(&self.envelope, None),
            Shape::Concave => envelope_json(&self.envelope, Some("concave")),
        }
    }

    /// Read a fit back from [`FittedEnvelope::to_json`] output.
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let parsed: crate::geometry::EnvelopeJson = serde_json::from_str(text)
            .map_err(|e| GeometryError::InvalidInput(format!("envelope JSON: {e}")))?;
        let shape = match parsed.shape.as_deref() {
            None | Some("convex") => Shape::Convex,
            Some("concave") => Shape::Concave,
            Some(other) => {
                return Err(GeometryError::InvalidInput(format!(
                    "unknown shape '{other}'"
                )))
            }
        };
        Ok(FittedEnvelope {
            envelope: parsed.into_envelope()?,
            shape,
            skipped_grid_points: 0,
            degree_fallbacks: 0,
            bandwidth: f64::NAN,
        })
    }
}

/// Resolve the smoother spec against the data (runs cross-validation when
/// requested) and return the fitted smoother.
pub fn build_smoother(data: &Dataset, spec: &SmootherSpec) -> Result<SmootherFit, SmoothingError> {
    match spec {
        SmootherSpec::NadarayaWatson {
            kernel,
            bandwidth,
            form,
        } => {
            let h = resolve_bandwidth(data, *kernel, bandwidth, CvSmoother::NadarayaWatson)?;
            SmootherFit::nadaraya_watson(data.clone(), *kernel, h, *form)
        }
        SmootherSpec::LocalPoly {
            kernel,
            degree,
            bandwidth,
        } => {
            let h = resolve_bandwidth(
                data,
                *kernel,
                bandwidth,
                CvSmoother::LocalPoly { degree: *degree },
            )?;
            SmootherFit::local_poly(data.clone(), *kernel, h, *degree)
        }
        SmootherSpec::MovingWindow { bandwidth } => {
            let h = resolve_bandwidth(
                data,
                Kernel::UniformBall,
                bandwidth,
                CvSmoother::MovingWindow,
            )?;
            SmootherFit::moving_window(data.clone(), h)
        }
    }
}

fn resolve_bandwidth(
    data: &Dataset,
    kernel: Kernel,
    bandwidth: &Bandwidth,
    cv: CvSmoother,
) -> Result<f64, SmoothingError> {
    match bandwidth {
        Bandwidth::Fixed(h) => Ok(*h),
        Bandwidth::MovingWindowSchedule { scale } => {
            Ok(scale * moving_window_bandwidth(data.len(), data.dim())?)
        }
        Bandwidth::CrossValidated(cands) => {
            let default;
            let cands = match cands {
                Some(c) => c.as_slice(),
                None => {
                    default = crate::smoothing::default_bandwidth_candidates(data);
                    &default
                }
            };
            cross_validate_bandwidth(data, kernel, cv, cands)
        }
    }
}

/// Resolve the grid spec over the fit domain.
pub fn build_grid(domain: &PolyhedralDomain, spec: &GridSpec) -> Result<Grid, GeometryError> {
    match spec {
        GridSpec::PerAxis(m) => uniform_grid(domain, *m),
        GridSpec::Explicit { points, mesh } => {
            Grid::from_points(domain.clone(), points.clone(), *mesh)
        }
    }
}

fn fit_domain(data: &Dataset, config: &PipelineConfig) -> Result<PolyhedralDomain, PipelineError> {
    if let Some(q) = &config.domain {
        return Ok(q.clone());
    }
    if let Some(q) = data.domain() {
        return Ok(q.clone());
    }
    let (lower, upper) = data.bounding_box();
    PolyhedralDomain::box_domain(&lower, &upper).map_err(PipelineError::Convexification)
}

/// The whole procedure: smooth the data, sample the smoother on a covering
/// grid, and take the lower convex envelope of the samples. Concave fits
/// negate the responses before smoothing and negate the result on output.
pub fn fit_convex(
    data: &Dataset,
    config: &PipelineConfig,
) -> Result<FittedEnvelope, PipelineError> {
    if data.is_empty() {
        return Err(PipelineError::InvalidConfig("empty dataset".into()));
    }
    let working = match config.shape {
        Shape::Convex => data.clone(),
        Shape::Concave => data.negated(),
    };
    let domain = fit_domain(data, config)?;
    let smoother = build_smoother(&working, &config.smoother).map_err(PipelineError::Smoothing)?;
    let grid = build_grid(&domain, &config.grid).map_err(PipelineError::Convexification)?;
    let GridSamples {
        samples,
        skipped,
        degree_fallbacks,
    } = sample_on_grid(&smoother, &grid, config.sampling).map_err(PipelineError::Sampling)?;
    let envelope = lower_hull_on(&samples, domain).map_err(PipelineError::Convexification)?;
    Ok(FittedEnvelope {
        envelope,
        shape: config.shape,
        skipped_grid_points: skipped,
        degree_fallbacks,
        bandwidth: smoother.bandwidth(),
    })
}

/// Error-bound diagnostics for a fit against a known regression function.
///
/// With `eps_n = max over the grid of |f_n - f|` and Lipschitz constant `L`,
/// the convexified estimate satisfies `-eps_n <= phi - f <= eps_n + L * mesh`
/// on the whole domain whenever `f` is convex; the observed extremes over a
/// dense test grid are reported next to those bounds, together with the
/// sup-norm comparison `||phi - f|| <= ||f_n - f|| + L * mesh`.
#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub eps_n: f64,
    pub lipschitz: f64,
    pub lipschitz_estimated: bool,
    pub bound_lo: f64,
    pub bound_hi: f64,
    pub observed_min: f64,
    pub observed_max: f64,
    /// Sup of |phi - f| over the dense test grid.
    pub sup_phi_error: f64,
    /// Sup of |f_n - f| over the dense test grid plus `L * mesh`.
    pub sup_bound: f64,
    pub within_bounds: bool,
}

/// Dense evaluation grid used for sup-norm proxies: 1001 points along each
/// axis in dimension 1, 101 x 101 in dimension 2.
pub fn dense_test_grid(domain: &PolyhedralDomain) -> Vec<Vec<f64>> {
    let per_axis = match domain.dim() {
        1 => 1001,
        _ => 101,
    };
    match uniform_grid(domain, per_axis) {
        Ok(g) => g.points().to_vec(),
        // Non-box domains fall back to the vertices plus nothing denser.
        Err(_) => domain.vertices().to_vec(),
    }
}

/// Check the error-band inequality for a fitted envelope.
///
/// `lipschitz`: analytic constant if known; otherwise it is estimated from
/// finite differences over the dense grid and flagged as an estimate.
pub fn check_error_bounds(
    f_true: &(dyn Fn(&[f64]) -> f64 + Sync),
    lipschitz: Option<f64>,
    smoother: &SmootherFit,
    grid: &Grid,
    envelope: &ConvexEnvelope,
    tol: f64,
) -> Result<DiagnosticsReport, PipelineError> {
    // eps_n: sup over the grid of the smoothing error.
    let mut eps_n = 0.0f64;
    for g in grid.points() {
        let fv = smoother.eval(g).map_err(PipelineError::Smoothing)?;
        eps_n = eps_n.max((fv - f_true(g)).abs());
    }
    let test_points = dense_test_grid(grid.domain());
    let (lipschitz, lipschitz_estimated) = match lipschitz {
        Some(l) => (l, false),
        None => (estimate_lipschitz(f_true, &test_points), true),
    };
    let bound_lo = -eps_n;
    let bound_hi = eps_n + lipschitz * grid.mesh();
    let mut observed_min = f64::INFINITY;
    let mut observed_max = f64::NEG_INFINITY;
    let mut sup_phi_error = 0.0f64;
    let mut sup_smooth_error = 0.0f64;
    for x in &test_points {
        let diff = envelope.eval_unchecked(x) - f_true(x);
        observed_min = observed_min.min(diff);
        observed_max = observed_max.max(diff);
        sup_phi_error = sup_phi_error.max(diff.abs());
        if let Ok(fv) = smoother.eval(x) {
            sup_smooth_error = sup_smooth_error.max((fv - f_true(x)).abs());
        }
    }
    let sup_bound = sup_smooth_error + lipschitz * grid.mesh();
    let within_bounds = observed_min >= bound_lo - tol
        && observed_max <= bound_hi + tol
        && sup_phi_error <= sup_bound + tol;
    Ok(DiagnosticsReport {
        eps_n,
        lipschitz,
        lipschitz_estimated,
        bound_lo,
        bound_hi,
        observed_min,
        observed_max,
        sup_phi_error,
        sup_bound,
        within_bounds,
    })
}

fn estimate_lipschitz(f: &(dyn Fn(&[f64]) -> f64 + Sync), points: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in points.iter().skip(i + 1).take(8) {
            let dist: f64 = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if dist > 0.0 {
                best = best.max((f(a) - f(b)).abs() / dist);
            }
        }
    }
    best
}

/// One row of the empirical rate check.
#[derive(Debug, Clone)]
pub struct RateRow {
    pub n: usize,
    pub bandwidth: f64,
    pub mesh_target: f64,
    pub mean_sup_error: f64,
}

/// Result table of [`empirical_rate_check`].
#[derive(Debug, Clone)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Fraction of consecutive sample-size pairs with decreasing error.
    pub decreasing_fraction: f64,
}

/// Empirical convergence-trend check: for each `n`, draw uniform designs with
/// Gaussian noise, fit with the moving-window smoother at the
/// `(log n / n)^{1/(d+2)}` bandwidth and a grid with mesh `h_n / log n`, and
/// record the mean sup-error against `f_true` over a fixed dense grid.
pub fn empirical_rate_check(
    f_true: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    n_list: &[usize],
    replications: usize,
    sigma: f64,
    seed: u64,
) -> Result<RateTable, PipelineError> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PipelineError::InvalidConfig(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    let domain = PolyhedralDomain::box_domain(&vec![0.0; dim], &vec![1.0; dim])
        .map_err(PipelineError::Convexification)?;
    let test_points = dense_test_grid(&domain);
    let mut rows = Vec::with_capacity(n_list.len());
    for (ni, &n) in n_list.iter().enumerate() {
        let h = moving_window_bandwidth(n, dim).map_err(PipelineError::Smoothing)?;
        let delta = h / (n as f64).ln();
        // Smallest per-axis count whose cell diagonal is at most delta.
        let per_axis = (((dim as f64).sqrt() / delta).ceil() as usize + 1).max(2);
        let config = PipelineConfig {
            smoother: SmootherSpec::MovingWindow {
                bandwidth: Bandwidth::Fixed(h),
            },
            grid: GridSpec::PerAxis(per_axis),
            shape: Shape::Convex,
            domain: Some(domain.clone()),
            sampling: SamplingMode::Strict,
        };
        let sup_errors: Vec<f64> = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replication_rng(seed, (ni * replications + rep) as u64);
                let mut xs = Vec::with_capacity(n);
                let mut ys = Vec::with_capacity(n);
                for _ in 0..n {
                    let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                    let noise: f64 = rng.sample(StandardNormal);
                    ys.push(f_true(&x) + sigma * noise);
                    xs.push(x);
                }
                let data = Dataset::new(xs, ys).map_err(PipelineError::Smoothing)?;
                let fit = fit_convex(&data, &config)?;
                let sup = test_points
                    .iter()
                    .map(|x| (fit.eval_unchecked(x) - f_true(x)).abs())
                    .fold(0.0f64, f64::max);
                Ok(sup)
            })
            .collect::<Result<Vec<f64>, PipelineError>>()?;
        // Ordered pairwise summation keeps the mean independent of thread
        // scheduling.
        let mean = pairwise_sum(&sup_errors) / replications as f64;
        rows.push(RateRow {
            n,
            bandwidth: h,
            mesh_target: delta,
            mean_sup_error: mean,
        });
    }
    let pairs = rows.len().saturating_sub(1);
    let decreasing = rows
        .windows(2)
        .filter(|w| w[1].mean_sup_error < w[0].mean_sup_error)
        .count();
    Ok(RateTable {
        rows,
        decreasing_fraction: if pairs == 0 {
            1.0
        } else {
            decreasing as f64 / pairs as f64
        },
    })
}

/// Sum by recursive halving; deterministic for a given slice order.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}
