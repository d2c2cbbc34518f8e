//! The fit / band / simulate / replay commands.

use crate::csv_io::read_csv;
use crate::error::CliError;
use crate::manifest::{file_digest, ResolvedCommand, RunManifest};
use clap::Args;
use convexreg::bands::{confidence_band, BandConfig};
use convexreg::geometry::uniform_grid;
use convexreg::pipeline::{
    fit_convex, Bandwidth, FittedEnvelope, GridSpec, NwForm, PipelineConfig, SamplingMode, Shape,
    SmootherSpec,
};
use convexreg::sim::{reproduce_figure, write_atomic, FigureOptions, StudyId};
use convexreg::Kernel;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated predictor column names.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub x_cols: Vec<String>,
    /// Response column name.
    #[arg(long)]
    pub y_col: String,
    /// convex | concave
    #[arg(long, default_value = "convex")]
    pub shape: String,
    /// localpoly | nw | movingwindow
    #[arg(long, default_value = "localpoly")]
    pub smoother: String,
    /// Local-polynomial degree (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// gaussian | epanechnikov | uniform-ball
    #[arg(long, default_value = "gaussian")]
    pub kernel: String,
    /// A positive number, or "cv" for leave-one-out cross-validation.
    #[arg(long, default_value = "cv")]
    pub bandwidth: String,
    /// Grid points per axis for the convexification step.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Evaluate the output curve by the max-of-planes formula even outside
    /// the fitted domain.
    #[arg(long, default_value_t = false)]
    pub extend: bool,
    /// Drop unevaluable grid points (with a count) instead of failing.
    #[arg(long, default_value_t = false)]
    pub lenient: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BandArgs {
    /// Input CSV with a header row (one-dimensional designs only).
    #[arg(long)]
    pub input: PathBuf,
    /// Predictor column name.
    #[arg(long, default_value = "x")]
    pub x_col: String,
    /// Response column name.
    #[arg(long, default_value = "y")]
    pub y_col: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Bandwidth exponent delta in h = n^{-delta}, inside (1/5, 1/3).
    #[arg(long, default_value_t = 0.3)]
    pub delta_exponent: f64,
    /// Compactly supported kernel: epanechnikov | uniform-ball
    #[arg(long, default_value = "epanechnikov")]
    pub kernel: String,
    /// Grid points for the convexification of the band smoother.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Attach the band around the convexified estimate or the raw smoother.
    #[arg(long, default_value = "envelope")]
    pub center: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// regression1d | varbiasmse1d | confidence | regression2d | varbiasmse2d
    #[arg(long)]
    pub study: String,
    /// Replication override (studies default to 2000 runs).
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long, default_value_t = 17)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A run_manifest.json written by a previous command.
    pub manifest: PathBuf,
    /// Redirect outputs to a different directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_shape(name: &str) -> Result<Shape, CliError> {
    match name {
        "convex" => Ok(Shape::Convex),
        "concave" => Ok(Shape::Concave),
        other => Err(CliError::Usage(format!(
            "unknown shape '{other}' (convex | concave)"
        ))),
    }
}

fn parse_bandwidth(text: &str) -> Result<Bandwidth, CliError> {
    if text == "cv" {
        return Ok(Bandwidth::CrossValidated(None));
    }
    match text.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(Bandwidth::Fixed(h)),
        _ => Err(CliError::Usage(format!(
            "bandwidth must be a positive number or \"cv\", got {text:?}"
        ))),
    }
}

fn parse_smoother(args: &FitArgs) -> Result<SmootherSpec, CliError> {
    let kernel = Kernel::from_name(&args.kernel)?;
    let bandwidth = parse_bandwidth(&args.bandwidth)?;
    match args.smoother.as_str() {
        "localpoly" | "local-poly" => Ok(SmootherSpec::LocalPoly {
            kernel,
            degree: args.degree,
            bandwidth,
        }),
        "nw" | "nadaraya-watson" => Ok(SmootherSpec::NadarayaWatson {
            kernel,
            bandwidth,
            form: NwForm::Ratio,
        }),
        "movingwindow" | "moving-window" => Ok(SmootherSpec::MovingWindow { bandwidth }),
        other => Err(CliError::Usage(format!(
            "unknown smoother '{other}' (localpoly | nw | movingwindow)"
        ))),
    }
}

/// Curve evaluation grid over the fitted domain.
fn curve_points(fit: &FittedEnvelope) -> Result<Vec<Vec<f64>>, CliError> {
    let per_axis = if fit.domain().dim() == 1 { 1001 } else { 101 };
    Ok(uniform_grid(fit.domain(), per_axis)?.points().to_vec())
}

pub fn run_fit(args: &FitArgs) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let data = read_csv(&args.input, &args.x_cols, &args.y_col)?;
    let config = PipelineConfig {
        smoother: parse_smoother(args)?,
        grid: GridSpec::PerAxis(args.grid),
        shape: parse_shape(&args.shape)?,
        domain: None,
        sampling: if args.lenient {
            SamplingMode::Lenient
        } else {
            SamplingMode::Strict
        },
    };
    let fit = fit_convex(&data, &config)?;
    std::fs::create_dir_all(&args.out)?;

    let envelope_path = args.out.join("envelope.json");
    write_atomic(&envelope_path, (fit.to_json() + "\n").as_bytes())?;

    let mut curve = String::new();
    let dim = fit.domain().dim();
    curve.push_str(&if dim == 1 {
        "x,estimate\n".to_string()
    } else {
        (1..=dim)
            .map(|k| format!("x{k}"))
            .collect::<Vec<_>>()
            .join(",")
            + ",estimate\n"
    });
    for p in curve_points(&fit)? {
        let value = fit.eval(&p, args.extend)?;
        let coords = p
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        curve.push_str(&format!("{coords},{value}\n"));
    }
    let curve_path = args.out.join("curve.csv");
    write_atomic(&curve_path, curve.as_bytes())?;

    let mut manifest = RunManifest::new(
        ResolvedCommand::Fit(args.clone()),
        Some(file_digest(&args.input)?),
    );
    manifest.outputs = vec!["envelope.json".into(), "curve.csv".into()];
    manifest.timings_ms = started.elapsed().as_millis() as u64;
    let manifest_path = manifest.write(&args.out)?;

    println!(
        "fit: {} pieces, bandwidth {:.6}, shape {} -> {}",
        fit.envelope().pieces().len(),
        fit.bandwidth,
        fit.shape().name(),
        args.out.display()
    );
    if fit.skipped_grid_points > 0 {
        println!(
            "fit: {} grid points skipped (lenient)",
            fit.skipped_grid_points
        );
    }
    Ok(vec![envelope_path, curve_path, manifest_path])
}

pub fn run_band(args: &BandArgs) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let data = read_csv(&args.input, std::slice::from_ref(&args.x_col), &args.y_col)?;
    let config = BandConfig {
        alpha: args.alpha,
        delta_exponent: args.delta_exponent,
        kernel: Kernel::from_name(&args.kernel)?,
        ..BandConfig::default()
    };
    let (lower_box, upper_box) = data.bounding_box();
    let eval_xs: Vec<f64> = (0..=1000)
        .map(|k| lower_box[0] + (upper_box[0] - lower_box[0]) * k as f64 / 1000.0)
        .collect();
    let band = confidence_band(&data, &config, &eval_xs)?;
    let band = match args.center.as_str() {
        "smoother" => band,
        "envelope" => {
            // Convexify the same unnormalized kernel smoother the band is
            // built around, then re-center the band on it.
            let h = band.constants.bandwidth;
            let pipeline = PipelineConfig {
                smoother: SmootherSpec::NadarayaWatson {
                    kernel: config.kernel,
                    bandwidth: Bandwidth::Fixed(h),
                    form: NwForm::Unnormalized,
                },
                grid: GridSpec::PerAxis(args.grid),
                shape: Shape::Convex,
                domain: None,
                sampling: SamplingMode::Strict,
            };
            let fit = fit_convex(&data, &pipeline)?;
            let centers: Vec<f64> = eval_xs.iter().map(|&x| fit.eval_unchecked(&[x])).collect();
            band.with_centers(centers)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown center '{other}' (envelope | smoother)"
            )))
        }
    };
    std::fs::create_dir_all(&args.out)?;
    let mut rows = String::from("x,center,lower,upper,halfwidth\n");
    let lower = band.lower();
    let upper = band.upper();
    for (k, &x) in band.xs.iter().enumerate() {
        rows.push_str(&format!(
            "{x},{},{},{},{}\n",
            band.centers[k], lower[k], upper[k], band.halfwidths[k]
        ));
    }
    let band_path = args.out.join("band.csv");
    write_atomic(&band_path, rows.as_bytes())?;

    let width = band.mean_width();
    let mut manifest = RunManifest::new(
        ResolvedCommand::Band(args.clone()),
        Some(file_digest(&args.input)?),
    );
    manifest.outputs = vec!["band.csv".into()];
    manifest.timings_ms = started.elapsed().as_millis() as u64;
    let manifest_path = manifest.write(&args.out)?;
    println!(
        "band: width={width} (mean halfwidth x 2) -> {}",
        args.out.display()
    );
    Ok(vec![band_path, manifest_path])
}

pub fn run_simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let started = Instant::now();
    let study = StudyId::from_name(&args.study).map_err(CliError::from)?;
    let opts = FigureOptions {
        out_dir: args.out.clone(),
        replications: args.reps,
        seed: args.seed,
    };
    let files = reproduce_figure(study, &opts).map_err(CliError::from)?;
    let mut manifest = RunManifest::new(ResolvedCommand::Simulate(args.clone()), None);
    manifest.outputs = files
        .iter()
        .filter_map(|p| {
            p.strip_prefix(&args.out)
                .ok()
                .map(|rel| rel.display().to_string())
        })
        .collect();
    manifest.timings_ms = started.elapsed().as_millis() as u64;
    let manifest_path = manifest.write(&args.out)?;
    println!(
        "simulate {}: {} files -> {}",
        study.name(),
        files.len(),
        args.out.display()
    );
    let mut all = files;
    all.push(manifest_path);
    Ok(all)
}

pub fn run_replay(args: &ReplayArgs) -> Result<Vec<PathBuf>, CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let redirect = |out: &Path| args.out.clone().unwrap_or_else(|| out.to_path_buf());
    match manifest.command {
        ResolvedCommand::Fit(mut fit) => {
            fit.out = redirect(&fit.out);
            run_fit(&fit)
        }
        ResolvedCommand::Band(mut band) => {
            band.out = redirect(&band.out);
            run_band(&band)
        }
        ResolvedCommand::Simulate(mut sim) => {
            sim.out = redirect(&sim.out);
            run_simulate(&sim)
        }
    }
}
