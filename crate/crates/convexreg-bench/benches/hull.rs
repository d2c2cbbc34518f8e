use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use convexreg::geometry::lower_hull;

fn convex_1d_samples(n: usize) -> Vec<(Vec<f64>, f64)> {
    (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            let wiggle = 0.01 * (((i * 2654435761) % 97) as f64 / 97.0 - 0.5);
            (vec![x], (x - 0.3) * (x - 0.3) + wiggle)
        })
        .collect()
}

fn paraboloid_lattice(per_axis: usize) -> Vec<(Vec<f64>, f64)> {
    let mut samples = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for j in 0..per_axis {
            let x = vec![
                i as f64 / (per_axis - 1) as f64,
                j as f64 / (per_axis - 1) as f64,
            ];
            let v = x[0] * x[0] + 0.5 * x[1] * x[1];
            samples.push((x, v));
        }
    }
    samples
}

fn bench_lower_hull(c: &mut Criterion) {
    let mut group = c.benchmark_group("lower_hull");
    for n in [101usize, 1001] {
        let samples = convex_1d_samples(n);
        group.bench_with_input(BenchmarkId::new("1d", n), &samples, |b, s| {
            b.iter(|| lower_hull(black_box(s)).unwrap())
        });
    }
    for m in [11usize, 21] {
        let samples = paraboloid_lattice(m);
        group.bench_with_input(BenchmarkId::new("2d_lattice", m * m), &samples, |b, s| {
            b.iter(|| lower_hull(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn bench_evaluate(c: &mut Criterion) {
    let envelope = lower_hull(&paraboloid_lattice(21)).unwrap();
    let points: Vec<Vec<f64>> = (0..256)
        .map(|k| {
            let t = k as f64 / 255.0;
            vec![t, 1.0 - t]
        })
        .collect();
    c.bench_function("evaluate_256_points", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for p in &points {
                acc += envelope.eval_unchecked(black_box(p));
            }
            acc
        })
    });
}

criterion_group!(benches, bench_lower_hull, bench_evaluate);
criterion_main!(benches);
