//! Replication engine and pointwise variance / squared-bias / MSE surfaces.

use super::{SimError, TestFunction};
use crate::geometry::{uniform_grid, PolyhedralDomain};
use crate::pipeline::{fit_convex, PipelineConfig};
use crate::rng::replication_rng;
use crate::smoothing::Dataset;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// Design of the explanatory variables.
#[derive(Debug, Clone, Copy)]
pub enum Design {
    /// `n` points drawn uniformly on the domain box.
    UniformRandom { n: usize },
    /// A `per_axis^d` lattice, corners included.
    Lattice { per_axis: usize },
}

impl Design {
    pub fn size(&self, dim: usize) -> usize {
        match self {
            Design::UniformRandom { n } => *n,
            Design::Lattice { per_axis } => per_axis.pow(dim as u32),
        }
    }
}

/// Specification of a simulation study.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub function: TestFunction,
    pub design: Design,
    pub sigma: f64,
    pub replications: usize,
    pub seed: u64,
    pub pipeline: PipelineConfig,
    /// Evaluation-grid resolution per axis for the moment surfaces.
    pub eval_per_axis: usize,
    /// Redraw random designs every replication (the default) or freeze the
    /// replication-zero design.
    pub redraw_design: bool,
}

impl SimSpec {
    /// Study defaults matching the numerical experiments: local-linear
    /// Gaussian smoothing with cross-validated bandwidth on the unit box,
    /// a fitting grid of about the design size, and dense evaluation
    /// (1001 points in d = 1, 101 x 101 in d = 2).
    pub fn new(
        function: TestFunction,
        design: Design,
        sigma: f64,
        replications: usize,
        seed: u64,
    ) -> Result<Self, SimError> {
        let dim = function.dim();
        let (lower, upper) = function.domain_box();
        let domain = PolyhedralDomain::box_domain(&lower, &upper)
            .map_err(|e| SimError::InvalidSpec(e.to_string()))?;
        let mut pipeline = PipelineConfig::default_convex();
        pipeline.domain = Some(domain);
        pipeline.grid = crate::pipeline::GridSpec::PerAxis(match design {
            Design::Lattice { per_axis } => per_axis,
            Design::UniformRandom { n } => {
                if dim == 1 {
                    n
                } else {
                    (n as f64).powf(1.0 / dim as f64).round() as usize
                }
            }
        });
        Ok(SimSpec {
            function,
            design,
            sigma,
            replications,
            seed,
            pipeline,
            eval_per_axis: if dim == 1 { 1001 } else { 101 },
            redraw_design: true,
        })
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.sigma < 0.0 {
            return Err(SimError::InvalidSpec("sigma must be >= 0".into()));
        }
        if self.replications == 0 {
            return Err(SimError::InvalidSpec(
                "need at least one replication".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn unit_box(dim: usize) -> Result<PolyhedralDomain, SimError> {
    PolyhedralDomain::box_domain(&vec![0.0; dim], &vec![1.0; dim])
        .map_err(|e| SimError::InvalidSpec(e.to_string()))
}

/// Deterministic dataset for one replication: design points per the spec and
/// `y_i = f(x_i) + sigma z_i` with standard normal noise from the
/// `(seed, index)`-derived stream.
pub fn simulate_dataset(spec: &SimSpec, index: usize) -> Result<Dataset, SimError> {
    spec.validate()?;
    let dim = spec.function.dim();
    let domain = spec
        .pipeline
        .domain
        .clone()
        .map_or_else(|| unit_box(dim), Ok)?;
    let (lower, upper) = domain
        .box_bounds()
        .map(|(l, u)| (l.to_vec(), u.to_vec()))
        .ok_or_else(|| SimError::InvalidSpec("simulation domains must be boxes".into()))?;
    let xs: Vec<Vec<f64>> = match spec.design {
        Design::UniformRandom { n } => {
            let design_index = if spec.redraw_design {
                2 * index as u64
            } else {
                0
            };
            let mut rng = replication_rng(spec.seed, design_index);
            (0..n)
                .map(|_| {
                    (0..dim)
                        .map(|k| lower[k] + (upper[k] - lower[k]) * rng.gen::<f64>())
                        .collect()
                })
                .collect()
        }
        Design::Lattice { per_axis } => {
            let grid = uniform_grid(&domain, per_axis)
                .map_err(|e| SimError::InvalidSpec(e.to_string()))?;
            grid.points().to_vec()
        }
    };
    let mut noise_rng = replication_rng(spec.seed, 2 * index as u64 + 1);
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| {
            let z: f64 = noise_rng.sample(StandardNormal);
            spec.function.eval(x) + spec.sigma * z
        })
        .collect();
    Ok(Dataset::new(xs, ys)
        .map_err(|e| SimError::InvalidSpec(e.to_string()))?
        .with_domain(domain))
}

/// Pointwise moments of an estimator across replications.
///
/// Variance uses the population divisor `R` so that
/// `mse = variance + bias^2` holds pointwise as an identity.
#[derive(Debug, Clone)]
pub struct MomentSurface {
    pub points: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub bias_sq: Vec<f64>,
    pub mse: Vec<f64>,
}

/// Moments of the convex estimate over the replications of `spec`.
pub fn moment_study(spec: &SimSpec) -> Result<MomentSurface, SimError> {
    run_moment_study(spec, false).map(|(env, _)| env)
}

/// Moments of both the convex estimate and the raw smoother it was built
/// from, evaluated on the same grid.
pub fn moment_study_with_smoother(
    spec: &SimSpec,
) -> Result<(MomentSurface, MomentSurface), SimError> {
    let (env, smo) = run_moment_study(spec, true)?;
    Ok((env, smo.expect("smoother surface requested")))
}

fn run_moment_study(
    spec: &SimSpec,
    with_smoother: bool,
) -> Result<(MomentSurface, Option<MomentSurface>), SimError> {
    spec.validate()?;
    if spec.replications < 2 {
        return Err(SimError::InvalidSpec(
            "moment studies need at least 2 replications".into(),
        ));
    }
    let dim = spec.function.dim();
    let domain = spec
        .pipeline
        .domain
        .clone()
        .map_or_else(|| unit_box(dim), Ok)?;
    let eval_points = uniform_grid(&domain, spec.eval_per_axis)
        .map_err(|e| SimError::InvalidSpec(e.to_string()))?
        .points()
        .to_vec();

    struct RepCurves {
        envelope: Vec<f64>,
        smoother: Option<Vec<f64>>,
    }

    let run_one = |rep: usize| -> Result<RepCurves, SimError> {
        let data = simulate_dataset(spec, rep)?;
        let fitted = fit_convex(&data, &spec.pipeline)
            .map_err(|source| SimError::ReplicationFailed { index: rep, source })?;
        let envelope: Vec<f64> = eval_points
            .iter()
            .map(|x| fitted.eval_unchecked(x))
            .collect();
        let smoother =
            if with_smoother {
                let smooth = crate::pipeline::build_smoother(&data, &spec.pipeline.smoother)
                    .map_err(|e| SimError::ReplicationFailed {
                        index: rep,
                        source: crate::pipeline::PipelineError::Smoothing(e),
                    })?;
                let values = eval_points
                    .iter()
                    .map(|x| smooth.eval(x))
                    .collect::<Result<Vec<f64>, _>>()
                    .map_err(|e| SimError::ReplicationFailed {
                        index: rep,
                        source: crate::pipeline::PipelineError::Smoothing(e),
                    })?;
                Some(values)
            } else {
                None
            };
        Ok(RepCurves { envelope, smoother })
    };

    // Accumulate in replication order, in fixed-size chunks computed in
    // parallel, so the sums do not depend on thread scheduling.
    let p = eval_points.len();
    let mut acc_env = Accumulator::new(p);
    let mut acc_smo = if with_smoother {
        Some(Accumulator::new(p))
    } else {
        None
    };
    let truth: Vec<f64> = eval_points.iter().map(|x| spec.function.eval(x)).collect();
    let chunk = 64usize;
    let mut rep = 0usize;
    while rep < spec.replications {
        let hi = (rep + chunk).min(spec.replications);
        let curves: Vec<Result<RepCurves, SimError>> =
            (rep..hi).into_par_iter().map(run_one).collect();
        for c in curves {
            let c = c?;
            acc_env.add(&c.envelope, &truth);
            if let (Some(acc), Some(values)) = (acc_smo.as_mut(), c.smoother) {
                acc.add(&values, &truth);
            }
        }
        rep = hi;
    }
    let r = spec.replications as f64;
    let env = acc_env.finish(&eval_points, &truth, r);
    let smo = acc_smo.map(|a| a.finish(&eval_points, &truth, r));
    Ok((env, smo))
}

/// Kahan-compensated accumulators for the first two moments and the squared
/// deviation from the truth.
struct Accumulator {
    sum: Vec<f64>,
    sum_c: Vec<f64>,
    sum_sq: Vec<f64>,
    sum_sq_c: Vec<f64>,
    dev_sq: Vec<f64>,
    dev_sq_c: Vec<f64>,
}

impl Accumulator {
    fn new(p: usize) -> Self {
        Accumulator {
            sum: vec![0.0; p],
            sum_c: vec![0.0; p],
            sum_sq: vec![0.0; p],
            sum_sq_c: vec![0.0; p],
            dev_sq: vec![0.0; p],
            dev_sq_c: vec![0.0; p],
        }
    }

    fn add(&mut self, values: &[f64], truth: &[f64]) {
        for (k, (&v, &t)) in values.iter().zip(truth).enumerate() {
            kahan_add(&mut self.sum[k], &mut self.sum_c[k], v);
            kahan_add(&mut self.sum_sq[k], &mut self.sum_sq_c[k], v * v);
            let d = v - t;
            kahan_add(&mut self.dev_sq[k], &mut self.dev_sq_c[k], d * d);
        }
    }

    fn finish(self, points: &[Vec<f64>], truth: &[f64], r: f64) -> MomentSurface {
        let mean: Vec<f64> = self.sum.iter().map(|s| s / r).collect();
        let variance: Vec<f64> = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(&sq, &m)| (sq / r - m * m).max(0.0))
            .collect();
        let bias_sq: Vec<f64> = mean
            .iter()
            .zip(truth)
            .map(|(&m, &t)| (m - t) * (m - t))
            .collect();
        let mse: Vec<f64> = self.dev_sq.iter().map(|d| d / r).collect();
        MomentSurface {
            points: points.to_vec(),
            mean,
            variance,
            bias_sq,
            mse,
        }
    }
}

fn kahan_add(sum: &mut f64, comp: &mut f64, value: f64) {
    let y = value - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{Bandwidth, GridSpec, Shape, SmootherSpec};
    use crate::smoothing::{Kernel, SamplingMode};

    fn quick_spec(sigma: f64, reps: usize) -> SimSpec {
        let mut spec = SimSpec::new(
            TestFunction::F2,
            Design::UniformRandom { n: 40 },
            sigma,
            reps,
            1234,
        )
        .unwrap();
        spec.pipeline.smoother = SmootherSpec::LocalPoly {
            kernel: Kernel::Gaussian,
            degree: 1,
            bandwidth: Bandwidth::Fixed(0.15),
        };
        spec.pipeline.grid = GridSpec::PerAxis(41);
        spec.eval_per_axis = 101;
        spec
    }

    #[test]
    fn noiseless_data_hits_the_function() {
        let spec = quick_spec(0.0, 2);
        let data = simulate_dataset(&spec, 0).unwrap();
        for (x, &y) in data.xs().iter().zip(data.ys()) {
            assert_eq!(y, TestFunction::F2.eval(x));
        }
    }

    #[test]
    fn same_index_same_dataset() {
        let spec = quick_spec(0.1, 2);
        let a = simulate_dataset(&spec, 1).unwrap();
        let b = simulate_dataset(&spec, 1).unwrap();
        assert_eq!(a.xs(), b.xs());
        assert_eq!(a.ys(), b.ys());
        let c = simulate_dataset(&spec, 2).unwrap();
        assert_ne!(a.ys(), c.ys());
    }

    #[test]
    fn fixed_design_reuses_points() {
        let mut spec = quick_spec(0.1, 3);
        spec.redraw_design = false;
        let a = simulate_dataset(&spec, 0).unwrap();
        let b = simulate_dataset(&spec, 2).unwrap();
        assert_eq!(a.xs(), b.xs());
        assert_ne!(a.ys(), b.ys());
    }

    #[test]
    fn lattice_points_are_distinct() {
        let spec = SimSpec::new(
            TestFunction::F2d,
            Design::Lattice { per_axis: 10 },
            0.1,
            2,
            7,
        )
        .unwrap();
        let data = simulate_dataset(&spec, 0).unwrap();
        assert_eq!(data.len(), 100);
        let mut pts = data.xs().to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        assert_eq!(pts.len(), 100);
    }

    #[test]
    fn moment_decomposition_is_tight() {
        let spec = quick_spec(0.1, 24);
        let surface = moment_study(&spec).unwrap();
        for k in 0..surface.points.len() {
            let gap = (surface.mse[k] - surface.variance[k] - surface.bias_sq[k]).abs();
            assert!(gap <= 1e-10, "decomposition gap {gap} at point {k}");
            assert!(surface.variance[k] >= 0.0 && surface.mse[k] >= 0.0);
        }
    }

    #[test]
    fn noiseless_study_has_zero_variance() {
        let mut spec = quick_spec(0.0, 4);
        spec.redraw_design = false;
        let surface = moment_study(&spec).unwrap();
        let max_var = surface.variance.iter().fold(0.0f64, |a, &v| a.max(v));
        assert!(max_var <= 1e-12, "max variance {max_var}");
    }

    #[test]
    fn determinism_across_runs() {
        let spec = quick_spec(0.1, 8);
        let a = moment_study(&spec).unwrap();
        let b = moment_study(&spec).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.mse, b.mse);
    }

    #[test]
    fn study_failures_report_the_replication() {
        let mut spec = quick_spec(0.1, 3);
        // A moving window far narrower than the design spacing fails.
        spec.pipeline.smoother = SmootherSpec::MovingWindow {
            bandwidth: Bandwidth::Fixed(1e-6),
        };
        spec.pipeline.shape = Shape::Convex;
        spec.pipeline.sampling = SamplingMode::Strict;
        match moment_study(&spec) {
            Err(SimError::ReplicationFailed { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected replication failure, got {other:?}"),
        }
    }
}
