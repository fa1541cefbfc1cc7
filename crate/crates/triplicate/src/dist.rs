//! Standardized normal and Laplace error laws.
//!
//! Both laws are fixed at mean 0 and variance 1: the protocol model assumes
//! the measurement error scale is known, so callers standardize first and
//! rescale afterwards. The Laplace law therefore carries scale b = 1/√2,
//! giving density (1/√2)·exp(−√2|x|) and kurtosis 6.
//!
//! Besides the usual pdf/cdf/quantile/sampling surface, the module exposes
//! the law of the *difference* of two independent draws (`diff_pdf`,
//! `diff_cdf`, `diff_tail`), which is what the acceptance threshold and the
//! goodness-of-fit null are built on.

use crate::erf::erfc;
use crate::rng::RandomStream;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const INV_SQRT_2PI: f64 = 0.3989422804014327;
const INV_2_SQRT_PI: f64 = 0.28209479177387814; // 1/(2√π)

/// Errors from invalid distribution inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("input must be finite, got {0}")]
    NonFinite(f64),
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("difference threshold must be finite and nonnegative, got {0}")]
    InvalidThreshold(f64),
}

/// One of the two standardized error laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorModel {
    Normal,
    Laplace,
}

impl ErrorModel {
    /// Both models, in canonical order.
    pub const ALL: [ErrorModel; 2] = [ErrorModel::Normal, ErrorModel::Laplace];

    /// Density f(x).
    pub fn pdf(self, x: f64) -> Result<f64, DistError> {
        ensure_finite(x)?;
        Ok(self.pdf_raw(x))
    }

    /// Distribution function F(x).
    pub fn cdf(self, x: f64) -> Result<f64, DistError> {
        ensure_finite(x)?;
        Ok(self.cdf_raw(x))
    }

    /// Inverse distribution function; requires 0 < p < 1.
    pub fn quantile(self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::ProbabilityOutOfRange(p));
        }
        Ok(self.quantile_raw(p))
    }

    /// P(|X₁ − X₂| > r) for two independent draws; requires r ≥ 0.
    pub fn diff_tail(self, r: f64) -> Result<f64, DistError> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(DistError::InvalidThreshold(r));
        }
        Ok(self.diff_tail_raw(r))
    }

    /// Density of the difference X₁ − X₂.
    pub fn diff_pdf(self, z: f64) -> Result<f64, DistError> {
        ensure_finite(z)?;
        Ok(self.diff_pdf_raw(z))
    }

    /// Distribution function of the difference X₁ − X₂.
    pub fn diff_cdf(self, z: f64) -> Result<f64, DistError> {
        ensure_finite(z)?;
        Ok(self.diff_cdf_raw(z))
    }

    /// `n` independent draws from the law. Same stream state, same output.
    pub fn sample(self, stream: &mut RandomStream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(stream)).collect()
    }

    /// One draw by inverse-CDF transform of a single uniform variate.
    #[inline]
    pub fn sample_one(self, stream: &mut RandomStream) -> f64 {
        self.quantile_raw(stream.next_open01())
    }

    #[inline]
    pub(crate) fn pdf_raw(self, x: f64) -> f64 {
        match self {
            ErrorModel::Normal => INV_SQRT_2PI * (-0.5 * x * x).exp(),
            ErrorModel::Laplace => FRAC_1_SQRT_2 * (-SQRT_2 * x.abs()).exp(),
        }
    }

    #[inline]
    pub(crate) fn cdf_raw(self, x: f64) -> f64 {
        match self {
            ErrorModel::Normal => 0.5 * erfc(-x * FRAC_1_SQRT_2),
            ErrorModel::Laplace => {
                if x < 0.0 {
                    0.5 * (SQRT_2 * x).exp()
                } else {
                    1.0 - 0.5 * (-SQRT_2 * x).exp()
                }
            }
        }
    }

    #[inline]
    pub(crate) fn quantile_raw(self, p: f64) -> f64 {
        match self {
            ErrorModel::Normal => normal_quantile(p),
            ErrorModel::Laplace => {
                // b·sgn(p − 1/2)·ln(1 − 2|p − 1/2|) with b = 1/√2; the
                // upper branch uses 1 − p, which is exact for p ≥ 1/2.
                if p <= 0.5 {
                    FRAC_1_SQRT_2 * (2.0 * p).ln()
                } else {
                    -FRAC_1_SQRT_2 * (2.0 * (1.0 - p)).ln()
                }
            }
        }
    }

    #[inline]
    pub(crate) fn diff_tail_raw(self, r: f64) -> f64 {
        match self {
            // X₁−X₂ ~ N(0,2): 2(1 − Φ(r/√2)) = erfc(r/2)
            ErrorModel::Normal => erfc(0.5 * r),
            // convolution of two Laplace(1/√2) laws, integrated past r
            ErrorModel::Laplace => (1.0 + r * FRAC_1_SQRT_2) * (-SQRT_2 * r).exp(),
        }
    }

    #[inline]
    pub(crate) fn diff_pdf_raw(self, z: f64) -> f64 {
        match self {
            ErrorModel::Normal => INV_2_SQRT_PI * (-0.25 * z * z).exp(),
            ErrorModel::Laplace => {
                let a = SQRT_2 * z.abs();
                0.25 * SQRT_2 * (1.0 + a) * (-a).exp()
            }
        }
    }

    #[inline]
    pub(crate) fn diff_cdf_raw(self, z: f64) -> f64 {
        if z >= 0.0 {
            1.0 - 0.5 * self.diff_tail_raw(z)
        } else {
            0.5 * self.diff_tail_raw(-z)
        }
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorModel::Normal => f.write_str("normal"),
            ErrorModel::Laplace => f.write_str("laplace"),
        }
    }
}

impl FromStr for ErrorModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(ErrorModel::Normal),
            "laplace" => Ok(ErrorModel::Laplace),
            other => Err(format!("unknown error model '{other}'")),
        }
    }
}

fn ensure_finite(x: f64) -> Result<(), DistError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(DistError::NonFinite(x))
    }
}

// Acklam's rational approximation to the standard normal quantile,
// polished by one Halley step against the erfc-based CDF. The initial
// estimate is good to ~1.2e-9 relative error; the cubically convergent
// correction takes it to full double precision.
fn normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        // exact by Sterbenz's lemma
        return -normal_quantile_lower(1.0 - p);
    }
    normal_quantile_lower(p)
}

#[allow(clippy::excessive_precision)] // published coefficients, verbatim
fn normal_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // Halley refinement: with f = Φ(x) − p, f'' / f' = −x.
    let density = INV_SQRT_2PI * (-0.5 * x * x).exp();
    if density > 1e-290 {
        let err = 0.5 * erfc(-x * FRAC_1_SQRT_2) - p;
        let u = err / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}
