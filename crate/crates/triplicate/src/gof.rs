//! Goodness-of-fit machinery for duplicate-assay differences.
//!
//! Batch differences are standardized by the prescribed per-assay σ, so
//! under the null the standardized difference Z = (X₁ − X₂)/σ follows the
//! *difference* law of two unit-variance errors (variance 2; the observed
//! sample standard deviation ≈ √2 is the corroborating signature). The fit
//! statistic is a variance-weighted Kolmogorov–Smirnov distance
//!
//! ```text
//! T_n = max_j |F(Z_j) − F_n(Z_j)| / √(F(Z_j)·(1 − F(Z_j)))
//! ```
//!
//! whose null distribution is tabulated by Monte Carlo, giving exact-level
//! p-values without asymptotic approximations.

use crate::dist::ErrorModel;
use crate::rng::RandomStream;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GofError {
    #[error("sigma must be finite and positive, got {0}")]
    InvalidSigma(f64),
    #[error("sample must be nonempty")]
    EmptySample,
    #[error("sample values must be finite, got {0}")]
    NonFinite(f64),
    #[error("count must be at least 1")]
    EmptyRun,
    #[error("observed statistic must be finite and nonnegative, got {0}")]
    InvalidObserved(f64),
}

/// Differences scaled to the standardized-error world.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedSample {
    /// Z_j = (X₁,j − X₂,j)/σ.
    pub z: Vec<f64>,
    pub sigma: f64,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n−1 denominator; 0 for a single point).
    pub sd: f64,
}

/// Fit report for one candidate error model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub model: ErrorModel,
    pub n: usize,
    pub t_n: f64,
    pub p_value: f64,
    pub reps: u64,
    pub seed: u64,
    pub sample_mean: f64,
    pub sample_sd: f64,
}

/// Scale raw differences by σ and summarize.
pub fn standardize(differences: &[f64], sigma: f64) -> Result<StandardizedSample, GofError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(GofError::InvalidSigma(sigma));
    }
    if differences.is_empty() {
        return Err(GofError::EmptySample);
    }
    if let Some(&bad) = differences.iter().find(|d| !d.is_finite()) {
        return Err(GofError::NonFinite(bad));
    }
    let z: Vec<f64> = differences.iter().map(|d| d / sigma).collect();
    let n = z.len();
    let mean = z.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(StandardizedSample {
        z,
        sigma,
        n,
        mean,
        sd,
    })
}

// Weights are clamped so an extreme observation cannot blow up the
// denominator; the clamp is invisible for data within ±8 sd.
const WEIGHT_CLAMP: f64 = 1e-12;

/// The standardized Kolmogorov–Smirnov statistic of `sample` against the
/// difference law of `model`.
///
/// F_n is the right-continuous empirical CDF evaluated at the sample
/// points themselves: F_n(Z_j) = #{Z_i ≤ Z_j}/n, with ties counted by ≤.
pub fn t_n(sample: &StandardizedSample, model: ErrorModel) -> f64 {
    let mut sorted = sample.z.clone();
    sorted.sort_by(f64::total_cmp);
    t_n_sorted(&sorted, model)
}

// Core on pre-sorted data; shared with the Monte Carlo loop.
fn t_n_sorted(sorted: &[f64], model: ErrorModel) -> f64 {
    let n = sorted.len() as f64;
    let mut best = 0.0_f64;
    let mut j = 0;
    while j < sorted.len() {
        // advance over a tie run; F_n jumps to the top of the run
        let mut k = j;
        while k + 1 < sorted.len() && sorted[k + 1] == sorted[j] {
            k += 1;
        }
        let f_n = (k + 1) as f64 / n;
        let f = model
            .diff_cdf_raw(sorted[j])
            .clamp(WEIGHT_CLAMP, 1.0 - WEIGHT_CLAMP);
        let t = (f - f_n).abs() / (f * (1.0 - f)).sqrt();
        if t > best {
            best = t;
        }
        j = k + 1;
    }
    best
}

/// Monte Carlo p-value for an observed statistic: the add-one-smoothed
/// fraction of `reps` fresh null samples of size `n` whose T_n meets or
/// exceeds `observed`.
///
/// The (1 + hits)/(reps + 1) estimator keeps the p-value valid (never
/// exactly zero) regardless of reps.
pub fn mc_pvalue(
    model: ErrorModel,
    n: usize,
    observed: f64,
    reps: u64,
    seed: u64,
) -> Result<f64, GofError> {
    if n == 0 || reps == 0 {
        return Err(GofError::EmptyRun);
    }
    if !(observed.is_finite() && observed >= 0.0) {
        return Err(GofError::InvalidObserved(observed));
    }
    let hits = simulate_hits(model, n, observed, reps, seed, 0);
    Ok((1 + hits) as f64 / (reps + 1) as f64)
}

// Replications per substream; fixed so the tally is schedule-independent.
const REP_BATCH: u64 = 512;

fn simulate_hits(
    model: ErrorModel,
    n: usize,
    observed: f64,
    reps: u64,
    seed: u64,
    stream_base: u64,
) -> u64 {
    let batches = reps.div_ceil(REP_BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RandomStream::substream(seed, stream_base + b);
            let count = REP_BATCH.min(reps - b * REP_BATCH);
            let mut hits = 0_u64;
            let mut zs = vec![0.0_f64; n];
            for _ in 0..count {
                for z in zs.iter_mut() {
                    // Z = (X₁ − X₂)/σ is σ-free: a difference of two
                    // standardized draws.
                    *z = model.sample_one(&mut stream) - model.sample_one(&mut stream);
                }
                zs.sort_by(f64::total_cmp);
                if t_n_sorted(&zs, model) >= observed {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// Full pipeline: standardize, compute T_n, and attach Monte Carlo
/// p-values under both candidate models. The two models consume disjoint
/// substream ranges of the same seed, so one seed fixes the whole report
/// pair.
pub fn gof_report(
    differences: &[f64],
    sigma: f64,
    reps: u64,
    seed: u64,
) -> Result<(GofReport, GofReport), GofError> {
    if reps == 0 {
        return Err(GofError::EmptyRun);
    }
    let sample = standardize(differences, sigma)?;
    let mut reports = Vec::with_capacity(2);
    for (idx, model) in ErrorModel::ALL.into_iter().enumerate() {
        let stat = t_n(&sample, model);
        let hits = simulate_hits(model, sample.n, stat, reps, seed, (idx as u64) << 48);
        reports.push(GofReport {
            model,
            n: sample.n,
            t_n: stat,
            p_value: (1 + hits) as f64 / (reps + 1) as f64,
            reps,
            seed,
            sample_mean: sample.mean,
            sample_sd: sample.sd,
        });
    }
    let laplace = reports.pop().unwrap();
    let normal = reports.pop().unwrap();
    Ok((normal, laplace))
}

/// Synthetic paired assays: x = μ + σ·e with e drawn from `model`. Stands
/// in for real duplicate-determination datasets in studies and demos.
pub fn synthetic_pairs(
    model: ErrorModel,
    n: usize,
    mu: f64,
    sigma: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, GofError> {
    if n == 0 {
        return Err(GofError::EmptyRun);
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(GofError::InvalidSigma(sigma));
    }
    if !mu.is_finite() {
        return Err(GofError::NonFinite(mu));
    }
    let mut stream = RandomStream::new(seed);
    Ok((0..n)
        .map(|_| {
            let x1 = mu + sigma * model.sample_one(&mut stream);
            let x2 = mu + sigma * model.sample_one(&mut stream);
            (x1, x2)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn standardize_zero_differences() {
        let s = standardize(&[0.0; 10], 0.4).unwrap();
        assert!(s.z.iter().all(|&z| z == 0.0));
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.n, 10);
    }

    #[test]
    fn standardize_scales_linearly() {
        let diffs = [0.3, -0.1, 0.7];
        let a = standardize(&diffs, 0.4).unwrap();
        let b = standardize(&diffs, 0.8).unwrap();
        for (za, zb) in a.z.iter().zip(&b.z) {
            assert!((za - 2.0 * zb).abs() < 1e-15);
        }
    }

    #[test]
    fn standardize_rejects_bad_input() {
        assert!(standardize(&[], 0.4).is_err());
        assert!(standardize(&[1.0], 0.0).is_err());
        assert!(standardize(&[1.0], -0.4).is_err());
        assert!(standardize(&[f64::NAN], 0.4).is_err());
    }

    #[test]
    fn synthetic_laplace_differences_have_sd_sqrt2() {
        let pairs = synthetic_pairs(ErrorModel::Laplace, 100_000, 5.0, 0.4, 31).unwrap();
        let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
        let s = standardize(&diffs, 0.4).unwrap();
        assert!((s.sd - SQRT_2).abs() < 0.02, "sd = {}", s.sd);
        assert!(s.mean.abs() < 0.02, "mean = {}", s.mean);
    }

    #[test]
    fn single_median_point_has_unit_statistic() {
        // F(0) = 1/2, F_n(0) = 1: T₁ = |1/2 − 1|/√(1/4) = 1
        let s = standardize(&[0.0], 0.4).unwrap();
        for model in ErrorModel::ALL {
            assert!((t_n(&s, model) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicated_sample_matches_brute_force() {
        let mut stream = RandomStream::new(5);
        let base: Vec<f64> = (0..50)
            .map(|_| {
                ErrorModel::Normal.sample_one(&mut stream)
                    - ErrorModel::Normal.sample_one(&mut stream)
            })
            .collect();
        let mut doubled = base.clone();
        doubled.extend(&base);

        let s = standardize(&doubled, 1.0).unwrap();
        for model in ErrorModel::ALL {
            // brute force straight from the definition
            let n = s.z.len() as f64;
            let mut brute = 0.0_f64;
            for &zj in &s.z {
                let f_n = s.z.iter().filter(|&&zi| zi <= zj).count() as f64 / n;
                let f = model.diff_cdf(zj).unwrap().clamp(1e-12, 1.0 - 1e-12);
                brute = brute.max((f - f_n).abs() / (f * (1.0 - f)).sqrt());
            }
            assert_eq!(t_n(&s, model), brute, "{model}");
        }
    }

    #[test]
    fn statistic_is_smaller_under_the_true_model() {
        let mut under_true = Vec::new();
        let mut under_wrong = Vec::new();
        for seed in 0..200 {
            let mut stream = RandomStream::new(seed);
            let zs: Vec<f64> = (0..199)
                .map(|_| {
                    ErrorModel::Laplace.sample_one(&mut stream)
                        - ErrorModel::Laplace.sample_one(&mut stream)
                })
                .collect();
            let s = standardize(&zs, 1.0).unwrap();
            under_true.push(t_n(&s, ErrorModel::Laplace));
            under_wrong.push(t_n(&s, ErrorModel::Normal));
        }
        let median = |xs: &mut Vec<f64>| {
            xs.sort_by(f64::total_cmp);
            xs[xs.len() / 2]
        };
        assert!(median(&mut under_true) < median(&mut under_wrong));
    }

    #[test]
    fn extreme_observations_hit_the_weight_clamp_not_infinity() {
        // a minimum 35 sd out pushes F to the lower clamp while F_n = 1/3,
        // so the weighted discrepancy blows up; it must stay finite and
        // bounded by the clamp
        let s = standardize(&[0.1, -0.2, -14.0], 0.4).unwrap();
        for model in ErrorModel::ALL {
            let t = t_n(&s, model);
            assert!(t.is_finite());
            assert!(t <= 1.0 / (WEIGHT_CLAMP * (1.0 - WEIGHT_CLAMP)).sqrt());
            assert!(t > 100.0, "clamped statistic should still be huge: {t}");
        }
    }

    #[test]
    fn pvalue_boundary_cases() {
        let reps = 999;
        let p0 = mc_pvalue(ErrorModel::Normal, 20, 0.0, reps, 1).unwrap();
        assert_eq!(p0, 1.0);
        let p_big = mc_pvalue(ErrorModel::Normal, 20, 100.0, reps, 1).unwrap();
        assert!(p_big <= 1.0 / (reps as f64 + 1.0));
    }

    #[test]
    fn pvalue_nonincreasing_in_observed() {
        let mut prev = f64::INFINITY;
        for observed in [0.0, 0.2, 0.5, 0.8, 1.2, 2.0] {
            let p = mc_pvalue(ErrorModel::Laplace, 50, observed, 2_000, 9).unwrap();
            assert!(p <= prev, "p({observed}) = {p} > {prev}");
            prev = p;
        }
    }

    #[test]
    fn pvalue_rejects_bad_arguments() {
        assert!(mc_pvalue(ErrorModel::Normal, 0, 0.5, 100, 1).is_err());
        assert!(mc_pvalue(ErrorModel::Normal, 10, 0.5, 0, 1).is_err());
        assert!(mc_pvalue(ErrorModel::Normal, 10, -0.5, 100, 1).is_err());
        assert!(mc_pvalue(ErrorModel::Normal, 10, f64::NAN, 100, 1).is_err());
    }

    #[test]
    fn report_pipeline_is_deterministic() {
        let pairs = synthetic_pairs(ErrorModel::Laplace, 199, 14.0, 0.4, 77).unwrap();
        let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
        let a = gof_report(&diffs, 0.4, 2_000, 123).unwrap();
        let b = gof_report(&diffs, 0.4, 2_000, 123).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.0.model, ErrorModel::Normal);
        assert_eq!(a.1.model, ErrorModel::Laplace);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn t_n_is_permutation_invariant(mut zs in proptest::collection::vec(-4.0_f64..4.0, 2..40)) {
            let original = standardize(&zs, 1.0).unwrap();
            let t_orig = t_n(&original, ErrorModel::Normal);
            zs.reverse();
            zs.rotate_left(1);
            let shuffled = standardize(&zs, 1.0).unwrap();
            prop_assert_eq!(t_orig, t_n(&shuffled, ErrorModel::Normal));
            prop_assert!(t_orig >= 0.0);
        }
    }
}
