//! Reproduce the simulation-study figure data as CSV file sets.

use super::{
    moment_study, moment_study_with_smoother, simulate_dataset, unit_box, Design, SimError,
    SimSpec, TestFunction,
};
use crate::bands::{confidence_band, BandConfig};
use crate::pipeline::{fit_convex, Bandwidth, SmootherSpec};
use crate::smoothing::NwForm;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// The five reproducible studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyId {
    /// Five fitted curves per one-dimensional test function.
    Regression1d,
    /// Variance / bias^2 / MSE curves for the convex estimate and the raw
    /// local-linear smoother.
    VarBiasMse1d,
    /// 95% confidence bands around the convexified kernel estimate.
    Confidence,
    /// Fitted surfaces on 10x10 and 20x20 lattice designs.
    Regression2d,
    /// Variance / bias^2 / MSE surfaces for the two-dimensional function.
    VarBiasMse2d,
}

impl StudyId {
    pub fn from_name(name: &str) -> Result<Self, SimError> {
        match name {
            "regression1d" => Ok(StudyId::Regression1d),
            "varbiasmse1d" => Ok(StudyId::VarBiasMse1d),
            "confidence" => Ok(StudyId::Confidence),
            "regression2d" => Ok(StudyId::Regression2d),
            "varbiasmse2d" => Ok(StudyId::VarBiasMse2d),
            other => Err(SimError::UnknownStudy(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StudyId::Regression1d => "regression1d",
            StudyId::VarBiasMse1d => "varbiasmse1d",
            StudyId::Confidence => "confidence",
            StudyId::Regression2d => "regression2d",
            StudyId::VarBiasMse2d => "varbiasmse2d",
        }
    }

    pub fn all() -> [StudyId; 5] {
        [
            StudyId::Regression1d,
            StudyId::VarBiasMse1d,
            StudyId::Confidence,
            StudyId::Regression2d,
            StudyId::VarBiasMse2d,
        ]
    }
}

/// Options for [`reproduce_figure`].
#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub out_dir: PathBuf,
    /// Replication override; the default is the studies' 2000 runs.
    pub replications: Option<usize>,
    pub seed: u64,
}

const ONE_D: [TestFunction; 3] = [TestFunction::F1, TestFunction::F2, TestFunction::F3];
const STUDY_N: usize = 100;
const STUDY_SIGMA: f64 = 0.1;
const STUDY_REPLICATIONS: usize = 2000;

/// Emit the CSV file set for one study under
/// `<out>/<study>/<function>/<artifact>.csv`, plus a study manifest
/// recording the spec, seed and version. Returns the files written.
pub fn reproduce_figure(study: StudyId, opts: &FigureOptions) -> Result<Vec<PathBuf>, SimError> {
    let study_dir = opts.out_dir.join(study.name());
    fs::create_dir_all(&study_dir)?;
    let reps = opts.replications.unwrap_or(STUDY_REPLICATIONS);
    let mut files = match study {
        StudyId::Regression1d => regression_1d(&study_dir, opts.seed)?,
        StudyId::VarBiasMse1d => var_bias_mse_1d(&study_dir, opts.seed, reps)?,
        StudyId::Confidence => confidence_study(&study_dir, opts.seed)?,
        StudyId::Regression2d => regression_2d(&study_dir, opts.seed)?,
        StudyId::VarBiasMse2d => var_bias_mse_2d(&study_dir, opts.seed, reps)?,
    };
    let manifest = study_dir.join("manifest.json");
    let body = serde_json::json!({
        "study": study.name(),
        "seed": opts.seed,
        "replications": reps,
        "n": STUDY_N,
        "sigma": STUDY_SIGMA,
        "version": format!("{}-{}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        "outputs": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    write_atomic(&manifest, (body.to_string() + "\n").as_bytes())?;
    files.push(manifest);
    Ok(files)
}

fn eval_grid_1d() -> Vec<f64> {
    (0..=1000).map(|k| k as f64 / 1000.0).collect()
}

fn regression_1d(dir: &Path, seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let mut files = Vec::new();
    for f in ONE_D {
        let fdir = dir.join(f.name());
        fs::create_dir_all(&fdir)?;
        let spec = SimSpec::new(
            f,
            Design::UniformRandom { n: STUDY_N },
            STUDY_SIGMA,
            5,
            seed,
        )?;
        for run in 0..5 {
            let data = simulate_dataset(&spec, run)?;
            let fit = fit_convex(&data, &spec.pipeline)?;
            let mut rows = String::from("x,estimate,exact\n");
            for &x in &eval_grid_1d() {
                rows.push_str(&format!(
                    "{x},{},{}\n",
                    fit.eval_unchecked(&[x]),
                    f.eval(&[x])
                ));
            }
            let path = fdir.join(format!("run_{run}.csv"));
            write_atomic(&path, rows.as_bytes())?;
            files.push(path);
        }
    }
    Ok(files)
}

fn moments_csv_1d(surface: &super::MomentSurface) -> String {
    let mut rows = String::from("x,mean,variance,bias_sq,mse\n");
    for (k, p) in surface.points.iter().enumerate() {
        rows.push_str(&format!(
            "{},{},{},{},{}\n",
            p[0], surface.mean[k], surface.variance[k], surface.bias_sq[k], surface.mse[k]
        ));
    }
    rows
}

fn var_bias_mse_1d(dir: &Path, seed: u64, reps: usize) -> Result<Vec<PathBuf>, SimError> {
    let mut files = Vec::new();
    for f in ONE_D {
        let fdir = dir.join(f.name());
        fs::create_dir_all(&fdir)?;
        let spec = SimSpec::new(
            f,
            Design::UniformRandom { n: STUDY_N },
            STUDY_SIGMA,
            reps,
            seed,
        )?;
        let (envelope, smoother) = moment_study_with_smoother(&spec)?;
        let env_path = fdir.join("envelope_moments.csv");
        write_atomic(&env_path, moments_csv_1d(&envelope).as_bytes())?;
        let smo_path = fdir.join("smoother_moments.csv");
        write_atomic(&smo_path, moments_csv_1d(&smoother).as_bytes())?;
        files.push(env_path);
        files.push(smo_path);
    }
    Ok(files)
}

fn confidence_study(dir: &Path, seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let mut files = Vec::new();
    let config = BandConfig::default();
    for f in ONE_D {
        let fdir = dir.join(f.name());
        fs::create_dir_all(&fdir)?;
        let mut spec = SimSpec::new(
            f,
            Design::UniformRandom { n: STUDY_N },
            STUDY_SIGMA,
            1,
            seed,
        )?;
        // The band theory wants the unnormalized kernel smoother, so the
        // convexification runs on that same estimator.
        let h = (STUDY_N as f64).powf(-config.delta_exponent);
        spec.pipeline.smoother = SmootherSpec::NadarayaWatson {
            kernel: config.kernel,
            bandwidth: Bandwidth::Fixed(h),
            form: NwForm::Unnormalized,
        };
        let data = simulate_dataset(&spec, 0)?;
        let fit = fit_convex(&data, &spec.pipeline)?;
        let xs = eval_grid_1d();
        let band = confidence_band(&data, &config, &xs)?;
        let centers: Vec<f64> = xs.iter().map(|&x| fit.eval_unchecked(&[x])).collect();
        let band = band.with_centers(centers)?;
        let mut rows = format!("# width={}\n", band.mean_width());
        rows.push_str("x,center,lower,upper\n");
        let lower = band.lower();
        let upper = band.upper();
        for (k, &x) in band.xs.iter().enumerate() {
            rows.push_str(&format!(
                "{x},{},{},{}\n",
                band.centers[k], lower[k], upper[k]
            ));
        }
        let path = fdir.join("band.csv");
        write_atomic(&path, rows.as_bytes())?;
        files.push(path);
    }
    Ok(files)
}

fn regression_2d(dir: &Path, seed: u64) -> Result<Vec<PathBuf>, SimError> {
    let mut files = Vec::new();
    let f = TestFunction::F2d;
    let fdir = dir.join(f.name());
    fs::create_dir_all(&fdir)?;
    for per_axis in [10usize, 20] {
        let spec = SimSpec::new(f, Design::Lattice { per_axis }, STUDY_SIGMA, 1, seed)?;
        let data = simulate_dataset(&spec, 0)?;
        let fit = fit_convex(&data, &spec.pipeline)?;
        let domain = spec
            .pipeline
            .domain
            .clone()
            .map_or_else(|| unit_box(2), Ok)?;
        let eval = crate::geometry::uniform_grid(&domain, 101)
            .map_err(|e| SimError::InvalidSpec(e.to_string()))?;
        let mut rows = String::from("x1,x2,estimate,exact\n");
        for p in eval.points() {
            rows.push_str(&format!(
                "{},{},{},{}\n",
                p[0],
                p[1],
                fit.eval_unchecked(p),
                f.eval(p)
            ));
        }
        let path = fdir.join(format!("surface_{per_axis}x{per_axis}.csv"));
        write_atomic(&path, rows.as_bytes())?;
        files.push(path);
    }
    Ok(files)
}

fn var_bias_mse_2d(dir: &Path, seed: u64, reps: usize) -> Result<Vec<PathBuf>, SimError> {
    let mut files = Vec::new();
    let f = TestFunction::F2d;
    let fdir = dir.join(f.name());
    fs::create_dir_all(&fdir)?;
    for per_axis in [10usize, 20] {
        let spec = SimSpec::new(f, Design::Lattice { per_axis }, STUDY_SIGMA, reps, seed)?;
        let surface = moment_study(&spec)?;
        let mut rows = String::from("x1,x2,mean,variance,bias_sq,mse\n");
        for (k, p) in surface.points.iter().enumerate() {
            rows.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p[0],
                p[1],
                surface.mean[k],
                surface.variance[k],
                surface.bias_sq[k],
                surface.mse[k]
            ));
        }
        let path = fdir.join(format!("moments_{per_axis}x{per_axis}.csv"));
        write_atomic(&path, rows.as_bytes())?;
        files.push(path);
    }
    Ok(files)
}

/// Write via a temporary sibling file and rename, so partial output never
/// lands under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
