//! Analysis toolkit for the duplicate-assay measurement protocol with a
//! conditional third measurement.
//!
//! A material is assayed twice. If the two determinations agree to within
//! a threshold r (calibrated so that disagreement happens with a chosen
//! rate α even when nothing is wrong), their average is reported.
//! Otherwise a third assay is taken and the report is the average of the
//! third value and whichever of the first two lies closest to it.
//!
//! The crate answers the question this protocol raises in practice: *what
//! does the reported value look like on exactly those occasions where the
//! duplicates disagreed?* Under normal measurement errors that conditional
//! distribution is bimodal, with modes on either side of the true value;
//! under Laplace errors it is unimodal and centered. The difference
//! matters wherever reported values feed penalty clauses.
//!
//! Capabilities, by module:
//!
//! * [`dist`]: standardized normal and Laplace laws (pdf/cdf/quantile,
//!   difference laws, inverse-CDF sampling on reproducible streams);
//! * [`quad`]: adaptive Gauss–Kronrod integration in 1-D and 2-D, robust
//!   to the indicator discontinuities these densities contain;
//! * [`threshold`]: solving P(|X₁−X₂| > r) = α and the tail-quantile
//!   table;
//! * [`conditional`]: the conditional density h and its exceedance
//!   curves, by two independent quadrature routes;
//! * [`estimator`]: the protocol itself plus seeded Monte Carlo studies;
//! * [`gof`]: standardized Kolmogorov–Smirnov fit tests with Monte Carlo
//!   p-values, for deciding which error law real duplicate data supports;
//! * [`cli`]: the `triplicate` binary surface (CSV/JSON emission).
//!
//! Start with [`conditional::ConditionalSpec`] for density work,
//! [`estimator::simulate`] for simulation, and [`gof::gof_report`] for
//! data analysis. The `examples/` directory exercises every capability
//! end to end.

#![forbid(unsafe_code)]

pub mod cli;
pub mod conditional;
pub mod dist;
mod erf;
pub mod estimator;
pub mod gof;
pub mod quad;
pub mod rng;
pub mod threshold;

pub use conditional::{ConditionalSpec, DensityCurve};
pub use dist::ErrorModel;
pub use estimator::{estimate, EstimatorOutcome, SimulationSummary};
pub use gof::{GofReport, StandardizedSample};
pub use quad::IntegrationResult;
pub use rng::RandomStream;
pub use threshold::Threshold;
