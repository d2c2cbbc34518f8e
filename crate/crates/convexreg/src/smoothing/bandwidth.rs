//! Bandwidth schedules and leave-one-out cross-validation.

use super::{Dataset, Kernel, NwForm, SmootherFit, SmoothingError};
use rayon::prelude::*;

/// The moving-window bandwidth schedule `(log n / n)^{1/(d+2)}`
/// (proportionality constant one).
pub fn moving_window_bandwidth(n: usize, dim: usize) -> Result<f64, SmoothingError> {
    if n < 2 {
        return Err(SmoothingError::InvalidInput(format!(
            "sample size must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    Ok((nf.ln() / nf).powf(1.0 / (dim as f64 + 2.0)))
}

/// Which estimator leave-one-out cross-validation scores.
#[derive(Debug, Clone, Copy)]
pub enum CvSmoother {
    LocalPoly { degree: usize },
    NadarayaWatson,
    MovingWindow,
}

/// Leave-one-out cross-validation over a candidate bandwidth list.
///
/// For every candidate `h`, score = mean of `(y_i - f^{(-i)}(x_i))^2` over
/// the observations whose leave-one-out fit exists. Candidates with more than
/// 20% failed leave-one-out evaluations are disqualified. Ties break to the
/// smaller bandwidth, so the result does not depend on evaluation order.
pub fn cross_validate_bandwidth(
    data: &Dataset,
    kernel: Kernel,
    smoother: CvSmoother,
    candidates: &[f64],
) -> Result<f64, SmoothingError> {
    Ok(cross_validate_scores(data, kernel, smoother, candidates)?.0)
}

/// Per-candidate `(bandwidth, score)` pairs in ascending-bandwidth order;
/// `None` marks disqualified candidates.
pub type CvScores = Vec<(f64, Option<f64>)>;

/// As [`cross_validate_bandwidth`], also returning the per-candidate scores.
pub fn cross_validate_scores(
    data: &Dataset,
    kernel: Kernel,
    smoother: CvSmoother,
    candidates: &[f64],
) -> Result<(f64, CvScores), SmoothingError> {
    if data.len() < 3 {
        return Err(SmoothingError::BandwidthSelection(format!(
            "need at least 3 observations, got {}",
            data.len()
        )));
    }
    if candidates.is_empty() {
        return Err(SmoothingError::BandwidthSelection(
            "empty candidate list".into(),
        ));
    }
    let mut hs: Vec<f64> = candidates.to_vec();
    if hs.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(SmoothingError::BandwidthSelection(
            "candidate bandwidths must be positive".into(),
        ));
    }
    hs.sort_by(f64::total_cmp);
    hs.dedup();

    let scores: Vec<(f64, Option<f64>)> = hs
        .par_iter()
        .map(|&h| (h, loocv_score(data, kernel, smoother, h)))
        .collect();

    let best = scores
        .iter()
        .filter_map(|&(h, s)| s.map(|s| (h, s)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    match best {
        Some((h, _)) => Ok((h, scores)),
        None => Err(SmoothingError::BandwidthSelection(
            "all candidates disqualified (too many failed leave-one-out fits)".into(),
        )),
    }
}

fn loocv_score(data: &Dataset, kernel: Kernel, smoother: CvSmoother, h: f64) -> Option<f64> {
    let fit = match smoother {
        CvSmoother::LocalPoly { degree } => {
            SmootherFit::local_poly(data.clone(), kernel, h, degree)
        }
        CvSmoother::NadarayaWatson => {
            SmootherFit::nadaraya_watson(data.clone(), kernel, h, NwForm::Ratio)
        }
        CvSmoother::MovingWindow => SmootherFit::moving_window(data.clone(), h),
    }
    .ok()?;
    let n = data.len();
    let mut failures = 0usize;
    let mut total = 0.0;
    let mut used = 0usize;
    for i in 0..n {
        match fit.eval_skipping(&data.xs()[i], i) {
            Ok(e) => {
                let r = data.ys()[i] - e.value;
                total += r * r;
                used += 1;
            }
            Err(_) => failures += 1,
        }
    }
    if used == 0 || failures * 5 > n {
        return None; // more than 20% failures disqualifies the candidate
    }
    let score = total / used as f64;
    // Scores at numerical zero (exact reproduction up to solver roundoff)
    // collapse to 0.0 so the smaller-bandwidth tie-break applies to them.
    Some(if score < 1e-24 { 0.0 } else { score })
}

/// Default candidate grid: 20 logarithmically spaced bandwidths from half the
/// average nearest-neighbor spacing up to the diameter of the design.
pub fn default_bandwidth_candidates(data: &Dataset) -> Vec<f64> {
    let n = data.len();
    let mut nn_total = 0.0;
    for (i, xi) in data.xs().iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, xj) in data.xs().iter().enumerate() {
            if i == j {
                continue;
            }
            let d2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.min(d2);
        }
        if best.is_finite() {
            nn_total += best.sqrt();
        }
    }
    let (lower, upper) = data.bounding_box();
    let diameter: f64 = lower
        .iter()
        .zip(&upper)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    let mut lo = 0.5 * nn_total / n as f64;
    let mut hi = diameter;
    if lo.is_nan() || lo <= 0.0 {
        lo = 1e-3 * hi.max(1.0);
    }
    if hi.is_nan() || hi <= lo {
        hi = 2.0 * lo;
    }
    let count = 20;
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_window_bandwidth_values() {
        // Direct evaluations of (ln n / n)^(1/(d+2)).
        let h1 = moving_window_bandwidth(100, 1).unwrap();
        assert!((h1 - (100.0f64.ln() / 100.0).powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((h1 - 0.3583).abs() < 5e-4);
        let h2 = moving_window_bandwidth(100, 2).unwrap();
        assert!((h2 - (100.0f64.ln() / 100.0).powf(0.25)).abs() < 1e-15);
        assert!((h2 - 0.4632).abs() < 5e-4);
    }

    #[test]
    fn moving_window_bandwidth_needs_two_points() {
        assert!(moving_window_bandwidth(1, 1).is_err());
    }

    #[test]
    fn exact_line_ties_break_small() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        // Local-linear reproduces the line exactly for every bandwidth, so
        // both scores are ~0 and the tie breaks to the smaller candidate.
        let h = cross_validate_bandwidth(
            &data,
            Kernel::Gaussian,
            CvSmoother::LocalPoly { degree: 1 },
            &[0.5, 0.1],
        )
        .unwrap();
        assert_eq!(h, 0.1);
    }

    #[test]
    fn scores_match_independent_recomputation() {
        let xs: Vec<f64> = (0..15).map(|i| i as f64 / 14.0).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| x * x + 1e-3 * ((i * 2654435761) % 97) as f64 / 97.0)
            .collect();
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let candidates = [0.15, 0.3, 0.6];
        let (_, scores) = cross_validate_scores(
            &data,
            Kernel::Gaussian,
            CvSmoother::LocalPoly { degree: 1 },
            &candidates,
        )
        .unwrap();
        for (h, score) in scores {
            // Recompute the LOOCV mean squared error by explicit refits on
            // datasets with the observation removed.
            let mut total = 0.0;
            for i in 0..xs.len() {
                let loo_xs: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &x)| x)
                    .collect();
                let loo_ys: Vec<f64> = ys
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &y)| y)
                    .collect();
                let loo = Dataset::univariate(&loo_xs, &loo_ys).unwrap();
                let fit = SmootherFit::local_poly(loo, Kernel::Gaussian, h, 1).unwrap();
                let r = ys[i] - fit.eval(&[xs[i]]).unwrap();
                total += r * r;
            }
            let expect = total / xs.len() as f64;
            assert!(
                (score.unwrap() - expect).abs() <= 1e-12,
                "h={h}: {} vs {expect}",
                score.unwrap()
            );
        }
    }

    #[test]
    fn empty_candidates_rejected() {
        let data = Dataset::univariate(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            cross_validate_bandwidth(
                &data,
                Kernel::Gaussian,
                CvSmoother::LocalPoly { degree: 1 },
                &[]
            ),
            Err(SmoothingError::BandwidthSelection(_))
        ));
    }

    #[test]
    fn all_disqualified_is_an_error() {
        // A compact kernel far narrower than the point spacing leaves every
        // leave-one-out window empty.
        let data = Dataset::univariate(&[0.0, 0.5, 1.0], &[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            cross_validate_bandwidth(
                &data,
                Kernel::UniformBall,
                CvSmoother::MovingWindow,
                &[1e-3]
            ),
            Err(SmoothingError::BandwidthSelection(_))
        ));
    }

    #[test]
    fn default_candidates_are_positive_and_sorted() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let ys = vec![0.0; 30];
        let data = Dataset::univariate(&xs, &ys).unwrap();
        let cands = default_bandwidth_candidates(&data);
        assert_eq!(cands.len(), 20);
        assert!(cands.windows(2).all(|w| w[0] < w[1]));
        assert!(cands[0] > 0.0);
        assert!((cands[19] - 1.0).abs() < 1e-12);
    }
}
