//! Property tests for the geometry and pipeline invariants.

use convexreg::geometry::{
    convex_combination_cover, envelope_oracle, lower_hull, make_box_domain, uniform_grid,
};
use convexreg::pipeline::{
    fit_convex, Bandwidth, GridSpec, PipelineConfig, SamplingMode, Shape, SmootherSpec,
};
use convexreg::smoothing::{sample_on_grid, Dataset, Kernel, SmootherFit};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    (-1000i64..=1000).prop_map(|k| k as f64 / 1000.0)
}

fn value() -> impl Strategy<Value = f64> {
    (-2000i64..=2000).prop_map(|k| k as f64 / 1000.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Random-triple midpoint convexity of hull envelopes in d = 1.
    #[test]
    fn envelope_convex_1d(
        samples in proptest::collection::vec((coord(), value()), 3..12),
        probes in proptest::collection::vec((coord(), coord(), 0.0f64..1.0), 50)
    ) {
        let pts: Vec<(Vec<f64>, f64)> = samples.iter().map(|&(x, v)| (vec![x], v)).collect();
        let distinct: std::collections::BTreeSet<i64> =
            samples.iter().map(|&(x, _)| (x * 1000.0) as i64).collect();
        prop_assume!(distinct.len() >= 2);
        let env = lower_hull(&pts).unwrap();
        for &(a, b, t) in &probes {
            let mid = t * a + (1.0 - t) * b;
            let lhs = env.eval_unchecked(&[mid]);
            let rhs = t * env.eval_unchecked(&[a]) + (1.0 - t) * env.eval_unchecked(&[b]);
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }

    /// Hull + evaluate agrees with the brute-force oracle in d = 1.
    #[test]
    fn oracle_equivalence_1d(
        samples in proptest::collection::vec((coord(), value()), 2..10),
        ts in proptest::collection::vec(0.0f64..1.0, 8)
    ) {
        let pts: Vec<(Vec<f64>, f64)> = samples.iter().map(|&(x, v)| (vec![x], v)).collect();
        let distinct: std::collections::BTreeSet<i64> =
            samples.iter().map(|&(x, _)| (x * 1000.0) as i64).collect();
        prop_assume!(distinct.len() >= 2);
        let env = lower_hull(&pts).unwrap();
        let lo = samples.iter().map(|&(x, _)| x).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|&(x, _)| x).fold(f64::NEG_INFINITY, f64::max);
        for &t in &ts {
            let x = lo + t * (hi - lo);
            let direct = env.evaluate(&[x], false).unwrap();
            let reference = envelope_oracle(&pts, &[x]).unwrap();
            prop_assert!((direct - reference).abs() <= 1e-8,
                "x={x}: hull {direct} vs oracle {reference}");
        }
    }

    /// Covering combinations reconstruct the point with tight weights.
    #[test]
    fn cover_reconstruction_2d(
        per_axis in 2usize..8,
        xs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 20)
    ) {
        let q = make_box_domain(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let grid = uniform_grid(&q, per_axis).unwrap();
        for &(a, b) in &xs {
            let x = [a, b];
            let combo = convex_combination_cover(&grid, &x).unwrap();
            prop_assert!(combo.len() <= 3);
            let total: f64 = combo.iter().map(|&(_, w)| w).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            let mut rec = [0.0, 0.0];
            for &(i, w) in &combo {
                let g = &grid.points()[i];
                prop_assert!(w >= 0.0);
                let dist = ((g[0] - x[0]).powi(2) + (g[1] - x[1]).powi(2)).sqrt();
                prop_assert!(dist <= grid.mesh() + 1e-12);
                rec[0] += w * g[0];
                rec[1] += w * g[1];
            }
            prop_assert!((rec[0] - x[0]).abs() <= 1e-12);
            prop_assert!((rec[1] - x[1]).abs() <= 1e-12);
        }
    }
}

/// Oracle equivalence in d = 2 on deterministic pseudo-random instances.
#[test]
fn oracle_equivalence_2d() {
    let mut state = 0x00c0_ffeeu64;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut tested = 0;
    while tested < 100 {
        let n = 4 + (next() * 6.0) as usize;
        let samples: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|_| (vec![next(), next()], 2.0 * next() - 1.0))
            .collect();
        let Ok(env) = lower_hull(&samples) else {
            continue; // degenerate draw (sites nearly collinear)
        };
        // Probe at convex combinations of three sample sites.
        for _ in 0..5 {
            let (i, j, k) = (
                (next() * n as f64) as usize % n,
                (next() * n as f64) as usize % n,
                (next() * n as f64) as usize % n,
            );
            let (mut a, mut b) = (next(), next());
            if a + b > 1.0 {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            let c = 1.0 - a - b;
            let x = [
                a * samples[i].0[0] + b * samples[j].0[0] + c * samples[k].0[0],
                a * samples[i].0[1] + b * samples[j].0[1] + c * samples[k].0[1],
            ];
            let direct = env.eval_unchecked(&x);
            let reference = envelope_oracle(&samples, &x).unwrap();
            assert!(
                (direct - reference).abs() <= 1e-8,
                "case {tested}: hull {direct} vs oracle {reference} at {x:?}"
            );
        }
        tested += 1;
    }
}

/// Membership: the envelope never exceeds the smoothed values on the
/// grid it was built from.
#[test]
fn envelope_below_smoother_on_grid() {
    let xs: Vec<f64> = (0..60).map(|i| i as f64 / 59.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (x - 0.3) * (x - 0.3) + 0.05 * (((i * 37) % 11) as f64 / 11.0 - 0.5))
        .collect();
    let data = Dataset::univariate(&xs, &ys).unwrap();
    let fit = SmootherFit::local_poly(data, Kernel::Gaussian, 0.08, 1).unwrap();
    let q = make_box_domain(&[0.0], &[1.0]).unwrap();
    let grid = uniform_grid(&q, 101).unwrap();
    let sampled = sample_on_grid(&fit, &grid, SamplingMode::Strict).unwrap();
    let env = lower_hull(&sampled.samples).unwrap();
    for (g, v) in &sampled.samples {
        assert!(env.eval_unchecked(g) <= v + 1e-9);
    }
}

/// Fitting the envelope's own support values reproduces the same function.
#[test]
fn idempotent_envelope_2d() {
    let mut samples = Vec::new();
    for i in 0..7 {
        for j in 0..7 {
            let x = vec![i as f64 / 6.0, j as f64 / 6.0];
            let v = (x[0] - 0.4f64).powi(2) + 0.3 * (x[1] - 0.7f64).powi(2);
            samples.push((x, v));
        }
    }
    let env = lower_hull(&samples).unwrap();
    let resampled: Vec<(Vec<f64>, f64)> = env
        .support()
        .iter()
        .map(|x| (x.clone(), env.eval_unchecked(x)))
        .collect();
    let env2 = lower_hull(&resampled).unwrap();
    for i in 0..=20 {
        for j in 0..=20 {
            let x = [i as f64 / 20.0, j as f64 / 20.0];
            assert!((env.eval_unchecked(&x) - env2.eval_unchecked(&x)).abs() <= 1e-9);
        }
    }
}

/// One-sided defect bound on synthetic data where eps_n is known exactly:
/// the envelope never falls more than eps_n below a convex truth.
#[test]
fn convexification_preserves_one_sided_defect() {
    let f = |x: &[f64]| (x[0] - 0.5).powi(2);
    let q = make_box_domain(&[0.0], &[1.0]).unwrap();
    let grid = uniform_grid(&q, 51).unwrap();
    // Perturb the exact values by a known bounded amount.
    let samples: Vec<(Vec<f64>, f64)> = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let eps = 0.01 * (((i * 29) % 7) as f64 / 7.0 - 0.5);
            (g.clone(), f(g) + eps)
        })
        .collect();
    let eps_n = samples
        .iter()
        .map(|(g, v)| (v - f(g)).abs())
        .fold(0.0f64, f64::max);
    let env = lower_hull(&samples).unwrap();
    for k in 0..=500 {
        let x = [k as f64 / 500.0];
        assert!(env.eval_unchecked(&x) >= f(&x) - eps_n - 1e-9);
    }
}

/// Bit-identical refits from identical inputs, across pipeline reruns.
#[test]
fn pipeline_determinism() {
    let xs: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| (3.0 * (x - 1.0)).exp() + 0.01 * (x * 71.0).sin())
        .collect();
    let data = Dataset::univariate(&xs, &ys).unwrap();
    let config = PipelineConfig {
        smoother: SmootherSpec::LocalPoly {
            kernel: Kernel::Gaussian,
            degree: 1,
            bandwidth: Bandwidth::CrossValidated(None),
        },
        grid: GridSpec::PerAxis(100),
        shape: Shape::Convex,
        domain: None,
        sampling: SamplingMode::Strict,
    };
    let a = fit_convex(&data, &config).unwrap();
    let b = fit_convex(&data, &config).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.bandwidth, b.bandwidth);
}
