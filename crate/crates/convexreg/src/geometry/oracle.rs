//! Brute-force reference for envelope values on small instances.

use super::GeometryError;
use crate::linalg;

/// Exact envelope value at `x` by direct minimization over convex
/// combinations: minimize `sum_k lambda_k v_k` subject to
/// `sum_k lambda_k x_k = x`, `lambda >= 0`, `sum lambda = 1`, enumerating
/// every support of size at most `d + 1`.
///
/// This is a validation reference, independent of the hull code: quadratic
/// or worse in the sample count, intended for at most ~15 samples. The hull
/// route (`lower_hull` + `evaluate`) must agree with it to high accuracy.
pub fn envelope_oracle(samples: &[(Vec<f64>, f64)], x: &[f64]) -> Result<f64, GeometryError> {
    let dim = x.len();
    let n = samples.len();
    if n == 0 {
        return Err(GeometryError::InvalidInput("no samples".into()));
    }
    if samples
        .iter()
        .any(|(p, v)| p.len() != dim || !v.is_finite())
    {
        return Err(GeometryError::InvalidInput(
            "sample dimensions must match the query point".into(),
        ));
    }
    if n > 15 {
        return Err(GeometryError::InvalidInput(
            "oracle instances are limited to 15 samples".into(),
        ));
    }
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = Vec::with_capacity(dim + 1);
    enumerate_subsets(n, dim + 1, &mut subset, &mut |chosen| {
        if let Some(value) = subset_value(samples, chosen, x) {
            best = best.min(value);
        }
    });
    if best.is_finite() {
        Ok(best)
    } else {
        Err(GeometryError::OutOfDomain { point: x.to_vec() })
    }
}

fn enumerate_subsets(n: usize, max_len: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if !cur.is_empty() {
        f(cur);
    }
    if cur.len() == max_len {
        return;
    }
    let start = cur.last().map_or(0, |&l| l + 1);
    for i in start..n {
        cur.push(i);
        enumerate_subsets(n, max_len, cur, f);
        cur.pop();
    }
}

/// Weights expressing `x` over the chosen support, if they exist and are
/// nonnegative; returns the combined value.
fn subset_value(samples: &[(Vec<f64>, f64)], chosen: &[usize], x: &[f64]) -> Option<f64> {
    let dim = x.len();
    let k = chosen.len();
    // Solve [x_k; 1] lambda = [x; 1] in the least-squares sense, then check
    // the residual: a consistent nonnegative solution certifies feasibility.
    let rows_t: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut col = samples[chosen[j]].0.clone();
            col.push(1.0);
            col
        })
        .collect();
    // Normal equations on the k x k Gram matrix.
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    let mut target = x.to_vec();
    target.push(1.0);
    for i in 0..k {
        for j in 0..k {
            gram[i * k + j] = super::dot(&rows_t[i], &rows_t[j]);
        }
        rhs[i] = super::dot(&rows_t[i], &target);
    }
    let lambda = linalg::solve(&mut gram, &mut rhs, k, 1e-12)?;
    if lambda.iter().any(|&l| l < -1e-9) {
        return None;
    }
    let mut recon = vec![0.0; dim + 1];
    for (j, &l) in lambda.iter().enumerate() {
        for (r, c) in recon.iter_mut().zip(&rows_t[j]) {
            *r += l * c;
        }
    }
    let err = recon
        .iter()
        .zip(&target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if err > 1e-9 {
        return None;
    }
    Some(
        lambda
            .iter()
            .zip(chosen)
            .map(|(&l, &i)| l * samples[i].1)
            .sum(),
    )
}
