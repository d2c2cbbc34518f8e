//! Fit a convex regression to noisy data and print the affine pieces.
//!
//! ```bash
//! cargo run --release -p convexreg --example convex_fit
//! ```

use convexreg::pipeline::{fit_convex, PipelineConfig};
use convexreg::sim::{simulate_dataset, Design, SimSpec, TestFunction};

fn main() {
    // 100 noisy observations of the parabola benchmark on [0, 1].
    let spec = SimSpec::new(
        TestFunction::F2,
        Design::UniformRandom { n: 100 },
        0.1,
        1,
        42,
    )
    .unwrap();
    let data = simulate_dataset(&spec, 0).unwrap();

    // Smooth with a cross-validated local-linear fit, sample it on a
    // 100-point grid, and take the lower convex envelope of the samples.
    let config = PipelineConfig::default_convex();
    let fit = fit_convex(&data, &config).unwrap();

    println!(
        "fitted {} affine pieces with bandwidth {:.4}",
        fit.envelope().pieces().len(),
        fit.bandwidth
    );
    println!("x, estimate, truth");
    for k in 0..=10 {
        let x = k as f64 / 10.0;
        println!(
            "{x:.1}, {:+.4}, {:+.4}",
            fit.eval(&[x], false).unwrap(),
            TestFunction::F2.eval(&[x])
        );
    }
}
