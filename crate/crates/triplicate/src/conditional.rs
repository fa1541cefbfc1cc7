//! Conditional distribution of the reported value given a rejected
//! duplicate pair.
//!
//! When the first two assays disagree by more than r, a third is drawn and
//! the reported value is the average of the third and the earlier assay
//! closest to it. Conditional on that rejection event, the reported value
//! has density
//!
//! ```text
//! h(x) = (2/α)·[g(x) + g(−x)]
//! ```
//!
//! where g is the defective density of the event {(X₁+X₃)/2 ≤ x,
//! X₁−X₂ > r, X₃ > (X₁+X₂)/2} differentiated in x:
//!
//! ```text
//! g(x) = ∬ 2·f(2x−x₁)·𝟙(x₂ < x₁−r, x₂ < 4x−3x₁)·f(x₁)·f(x₂) dx₁ dx₂
//! ```
//!
//! Integrating out x₂ collapses the indicator into the error CDF:
//!
//! ```text
//! g(x) = ∫ 2·f(2x−x₁)·f(x₁)·F(min(x₁−r, 4x−3x₁)) dx₁
//! ```
//!
//! [`ConditionalSpec::g_1d`] evaluates the reduced form and is the
//! production path; [`ConditionalSpec::g_2d`] evaluates the double integral
//! literally and is kept as an independent oracle: the two must agree to
//! quadrature accuracy, and the test suites hold them to it.

use crate::dist::ErrorModel;
use crate::quad::{self, IntegrationResult, QuadError, Rect};
use crate::threshold::{self, ThresholdError};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionalError {
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("evaluation point must be finite, got {0}")]
    NonFinite(f64),
    #[error("grid must be nonempty, finite, and strictly increasing")]
    InvalidGrid,
}

/// An error model bound to a rejection rate α and its solved threshold r.
///
/// Carries the quadrature settings used by every evaluation: `tol` is the
/// absolute tolerance per g-evaluation and `truncation` the half-width of
/// the working domain standing in for the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSpec {
    model: ErrorModel,
    alpha: f64,
    r: f64,
    tol: f64,
    truncation: f64,
}

/// Density and exceedance data tabulated on a grid.
///
/// `g_plus[i]` is g(xᵢ), `g_minus[i]` is g(−xᵢ), `h[i]` is exactly
/// `(2/α)·(g_plus[i] + g_minus[i])`, and `exceedance[i]` is the upper-tail
/// probability P(μ̂ > xᵢ | rejection).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub xs: Vec<f64>,
    pub g_plus: Vec<f64>,
    pub g_minus: Vec<f64>,
    pub h: Vec<f64>,
    pub exceedance: Vec<f64>,
}

impl ConditionalSpec {
    /// Bind a model to rejection rate `alpha`, solving for the threshold.
    pub fn new(model: ErrorModel, alpha: f64) -> Result<Self, ConditionalError> {
        let t = threshold::r_of_alpha(model, alpha)?;
        Ok(Self {
            model,
            alpha,
            r: t.r,
            tol: 1e-8,
            truncation: default_truncation(model),
        })
    }

    /// Replace the per-evaluation quadrature tolerance (default 1e-8).
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Replace the domain truncation half-width (default 10 for normal
    /// errors, 16 for Laplace; both leave tail mass far below tolerance).
    pub fn with_truncation(mut self, truncation: f64) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn model(&self) -> ErrorModel {
        self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The solved rejection threshold r(α).
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// g(x) by the one-dimensional reduction (production path).
    pub fn g_1d(&self, x: f64) -> Result<f64, ConditionalError> {
        ensure_finite(x)?;
        Ok(self.g_value(x, self.tol)?)
    }

    /// g(x) by literal two-dimensional quadrature of the double integral
    /// with the indicator region. Retained as an oracle for `g_1d`.
    pub fn g_2d(&self, x: f64) -> Result<f64, ConditionalError> {
        ensure_finite(x)?;
        let (lo, hi) = self.x1_window(x);
        let t = self.truncation;
        let f = self.model;
        let r = self.r;
        let result = quad::integrate_2d(
            |x1, x2| {
                if x1 - x2 > r && x2 < 4.0 * x - 3.0 * x1 {
                    2.0 * f.pdf_raw(2.0 * x - x1) * f.pdf_raw(x1) * f.pdf_raw(x2)
                } else {
                    0.0
                }
            },
            Rect::new(lo, hi, -t, hi),
            self.tol,
        )?;
        Ok(result.value.max(0.0))
    }

    /// Conditional density h(x) = (2/α)·[g(x) + g(−x)].
    pub fn h(&self, x: f64) -> Result<f64, ConditionalError> {
        ensure_finite(x)?;
        Ok(self.h_value(x, self.tol)?)
    }

    /// Upper-tail probability P(μ̂ > x | rejection) = ∫ₓ h(t) dt.
    pub fn exceedance(&self, x: f64) -> Result<f64, ConditionalError> {
        ensure_finite(x)?;
        let t = self.truncation;
        if x >= t {
            return Ok(0.0);
        }
        if x <= -t {
            return Ok(1.0);
        }
        // Split the error budget between the outer quadrature and the
        // noise that g-evaluation tolerance injects into h.
        let g_tol = self.nested_g_tol(x, t);
        let mut integrand = |u: f64| self.h_value(u, g_tol);
        let result = quad::integrate_fallible(&mut integrand, x, t, 0.5 * self.tol, 0)?;
        Ok(result.value.clamp(0.0, 1.0))
    }

    /// ∫ h over the truncated domain. Equals 1 up to truncation and
    /// quadrature error; exposed so normalization can be audited.
    pub fn density_mass(&self) -> Result<f64, ConditionalError> {
        let t = self.truncation;
        let g_tol = self.nested_g_tol(-t, t);
        let mut integrand = |u: f64| self.h_value(u, g_tol);
        let result = quad::integrate_fallible(&mut integrand, -t, t, 0.5 * self.tol, 0)?;
        Ok(result.value)
    }

    /// Cumulative mass of g on [−truncation, x]; approaches α/4 as x grows.
    /// Exposed for validation; the protocol itself only needs h.
    pub fn cumulative_g(&self, x: f64) -> Result<f64, ConditionalError> {
        ensure_finite(x)?;
        let t = self.truncation;
        if x <= -t {
            return Ok(0.0);
        }
        let g_tol = self.nested_g_tol(x, t);
        let mut integrand = |u: f64| self.g_value(u, g_tol);
        let result = quad::integrate_fallible(&mut integrand, -t, x.min(t), 0.5 * self.tol, 0)?;
        Ok(result.value.max(0.0))
    }

    /// Tabulate g, h, and exceedance over `grid` (strictly increasing).
    pub fn curve(&self, grid: &[f64]) -> Result<DensityCurve, ConditionalError> {
        if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
            return Err(ConditionalError::InvalidGrid);
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConditionalError::InvalidGrid);
        }

        let g_plus: Vec<f64> = grid
            .par_iter()
            .map(|&x| self.g_value(x, self.tol))
            .collect::<Result<_, _>>()?;
        let g_minus: Vec<f64> = grid
            .par_iter()
            .map(|&x| self.g_value(-x, self.tol))
            .collect::<Result<_, _>>()?;
        let scale = 2.0 / self.alpha;
        let h: Vec<f64> = g_plus
            .iter()
            .zip(&g_minus)
            .map(|(&p, &m)| scale * (p + m))
            .collect();

        // Exceedance accumulates panel integrals of h from the top of the
        // grid down, plus the tail above the last grid point. Kronrod
        // weights are positive, so panels of the nonnegative h are
        // nonnegative and the column is nonincreasing by construction.
        let n = grid.len();
        let g_tol = 0.1 * self.tol;
        let top = *grid.last().unwrap();
        let mut exceedance = vec![0.0; n];
        let tail = if top >= self.truncation {
            0.0
        } else {
            let mut integrand = |u: f64| self.h_value(u, g_tol);
            quad::integrate_fallible(&mut integrand, top, self.truncation, self.tol, 0)?
                .value
                .max(0.0)
        };
        exceedance[n - 1] = tail;
        let panels: Vec<f64> = grid
            .par_windows(2)
            .map(|w| {
                let mut integrand = |u: f64| self.h_value(u, g_tol);
                quad::integrate_fallible(
                    &mut integrand,
                    w[0],
                    w[1],
                    (self.tol * (w[1] - w[0])).max(1e-13),
                    0,
                )
                .map(|r| r.value.max(0.0))
            })
            .collect::<Result<_, _>>()?;
        for i in (0..n - 1).rev() {
            exceedance[i] = exceedance[i + 1] + panels[i];
        }

        Ok(DensityCurve {
            xs: grid.to_vec(),
            g_plus,
            g_minus,
            h,
            exceedance,
        })
    }

    // x₁ values outside this window leave both pdf factors negligible.
    fn x1_window(&self, x: f64) -> (f64, f64) {
        let t = self.truncation;
        ((-t).min(2.0 * x - t), t.max(2.0 * x + t))
    }

    fn g_value(&self, x: f64, tol: f64) -> Result<f64, QuadError> {
        let (lo, hi) = self.x1_window(x);
        let f = self.model;
        let r = self.r;
        let result: IntegrationResult = quad::integrate_1d(
            |x1| {
                let upper = (x1 - r).min(4.0 * x - 3.0 * x1);
                2.0 * f.pdf_raw(2.0 * x - x1) * f.pdf_raw(x1) * f.cdf_raw(upper)
            },
            lo,
            hi,
            tol,
        )?;
        Ok(result.value.max(0.0))
    }

    fn h_value(&self, x: f64, g_tol: f64) -> Result<f64, QuadError> {
        Ok((2.0 / self.alpha) * (self.g_value(x, g_tol)? + self.g_value(-x, g_tol)?))
    }

    // g tolerance that keeps (2/α)-amplified noise integrated over the
    // domain below half of the overall tolerance.
    fn nested_g_tol(&self, x: f64, t: f64) -> f64 {
        let range = (t - x).max(1.0);
        (0.25 * self.tol * self.alpha / (2.0 * range)).clamp(1e-13, self.tol)
    }
}

fn default_truncation(model: ErrorModel) -> f64 {
    match model {
        ErrorModel::Normal => 10.0,
        ErrorModel::Laplace => 16.0,
    }
}

fn ensure_finite(x: f64) -> Result<(), ConditionalError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(ConditionalError::NonFinite(x))
    }
}
