//! The measurement protocol and its Monte Carlo studies.
//!
//! Two assays are taken. If they agree to within the threshold r, their
//! average is reported. Otherwise, and only then, a third assay is obtained
//! and the report is the average of the third and whichever earlier assay
//! lies closest to it.

use crate::dist::ErrorModel;
use crate::rng::RandomStream;
use crate::threshold::{self, ThresholdError};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("assay value must be finite, got {0}")]
    NonFiniteAssay(f64),
    #[error("third assay supplier returned a non-finite value: {0}")]
    NonFiniteThird(f64),
    #[error("threshold must be finite and positive, got {0}")]
    InvalidThreshold(f64),
    #[error("sample count must be at least 1")]
    EmptyRun,
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

/// One execution of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorOutcome {
    pub x1: f64,
    pub x2: f64,
    /// Present exactly when the pair was rejected.
    pub x3: Option<f64>,
    pub rejected: bool,
    /// The reported value μ̂.
    pub mu_hat: f64,
}

/// Run the protocol on a duplicate pair, drawing the third assay from
/// `third` only if |x1 − x2| > r (strictly; the boundary case keeps the
/// pair).
///
/// A floating-point tie |x1 − x3| = |x2 − x3| resolves toward `x1`; any
/// fixed rule on that measure-zero set leaves the distribution theory
/// untouched, and indexing keeps the outcome deterministic.
pub fn estimate<F>(x1: f64, x2: f64, third: F, r: f64) -> Result<EstimatorOutcome, EstimatorError>
where
    F: FnOnce() -> f64,
{
    if !x1.is_finite() {
        return Err(EstimatorError::NonFiniteAssay(x1));
    }
    if !x2.is_finite() {
        return Err(EstimatorError::NonFiniteAssay(x2));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(EstimatorError::InvalidThreshold(r));
    }

    if (x1 - x2).abs() <= r {
        return Ok(EstimatorOutcome {
            x1,
            x2,
            x3: None,
            rejected: false,
            mu_hat: 0.5 * (x1 + x2),
        });
    }

    let x3 = third();
    if !x3.is_finite() {
        return Err(EstimatorError::NonFiniteThird(x3));
    }
    let closest = if (x1 - x3).abs() <= (x2 - x3).abs() {
        x1
    } else {
        x2
    };
    Ok(EstimatorOutcome {
        x1,
        x2,
        x3: Some(x3),
        rejected: true,
        mu_hat: 0.5 * (closest + x3),
    })
}

/// Aggregate view of `n` seeded protocol executions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub model: ErrorModel,
    pub alpha: f64,
    /// Threshold the runs were executed with.
    pub r: f64,
    pub n: u64,
    pub seed: u64,
    /// Fraction of executions that triggered a third assay.
    pub rejection_rate: f64,
    /// Number of rejected executions (length of `conditional_samples`).
    pub conditional_count: u64,
    /// Mean of the conditional μ̂ samples; absent if nothing was rejected.
    pub mean: Option<f64>,
    /// Variance (n−1 denominator) of the conditional μ̂ samples.
    pub variance: Option<f64>,
    /// μ̂ values of the rejected executions, in execution order.
    #[serde(skip_serializing)]
    pub conditional_samples: Vec<f64>,
}

// Executions per independently seeded substream. Fixing the partition (and
// not deriving it from the thread count) keeps results byte-identical no
// matter how rayon schedules the batches.
const BATCH: u64 = 1 << 16;

/// Run the protocol `n` times with errors from `model` and the threshold
/// solved for `alpha`. Deterministic in (model, alpha, n, seed).
pub fn simulate(
    model: ErrorModel,
    alpha: f64,
    n: u64,
    seed: u64,
) -> Result<SimulationSummary, EstimatorError> {
    if n == 0 {
        return Err(EstimatorError::EmptyRun);
    }
    let r = threshold::r_of_alpha(model, alpha)?.r;

    let batches = n.div_ceil(BATCH);
    let per_batch: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RandomStream::substream(seed, b);
            let count = BATCH.min(n - b * BATCH);
            let mut rejected = Vec::new();
            for _ in 0..count {
                let x1 = model.sample_one(&mut stream);
                let x2 = model.sample_one(&mut stream);
                let outcome = estimate(x1, x2, || model.sample_one(&mut stream), r)
                    .expect("sampled assays are finite");
                if outcome.rejected {
                    rejected.push(outcome.mu_hat);
                }
            }
            rejected
        })
        .collect();

    let conditional_samples: Vec<f64> = per_batch.into_iter().flatten().collect();
    let k = conditional_samples.len();
    let (mean, variance) = if k == 0 {
        (None, None)
    } else {
        let m = conditional_samples.iter().sum::<f64>() / k as f64;
        let v = if k > 1 {
            conditional_samples
                .iter()
                .map(|x| (x - m) * (x - m))
                .sum::<f64>()
                / (k - 1) as f64
        } else {
            0.0
        };
        (Some(m), Some(v))
    };

    Ok(SimulationSummary {
        model,
        alpha,
        r,
        n,
        seed,
        rejection_rate: k as f64 / n as f64,
        conditional_count: k as u64,
        mean,
        variance,
        conditional_samples,
    })
}

/// Draw `m` values from the conditional law of μ̂ given rejection, by
/// running the protocol and keeping only rejected executions (expected
/// cost: 1/α pair draws per kept value).
pub fn conditional_sample(
    model: ErrorModel,
    alpha: f64,
    m: u64,
    seed: u64,
) -> Result<Vec<f64>, EstimatorError> {
    if m == 0 {
        return Err(EstimatorError::EmptyRun);
    }
    let r = threshold::r_of_alpha(model, alpha)?.r;

    // Smaller batches here: each kept draw costs ~1/α protocol runs.
    let batch = 1_u64 << 12;
    let batches = m.div_ceil(batch);
    let per_batch: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = RandomStream::substream(seed, b);
            let quota = batch.min(m - b * batch) as usize;
            let mut kept = Vec::with_capacity(quota);
            while kept.len() < quota {
                let x1 = model.sample_one(&mut stream);
                let x2 = model.sample_one(&mut stream);
                if (x1 - x2).abs() > r {
                    let x3 = model.sample_one(&mut stream);
                    let closest = if (x1 - x3).abs() <= (x2 - x3).abs() {
                        x1
                    } else {
                        x2
                    };
                    kept.push(0.5 * (closest + x3));
                }
            }
            kept
        })
        .collect();

    Ok(per_batch.into_iter().flatten().collect())
}
