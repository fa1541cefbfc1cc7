//! Command-line front end.
//!
//! Every table and figure dataset the library can produce maps to one
//! subcommand; outputs are flat CSV (UTF-8, LF line endings) or JSON with
//! stable key order, so seeded invocations are byte-reproducible. Numeric
//! values are printed with 10 significant digits, except the tail table
//! which is conventionally rounded to 3 decimals.

use crate::conditional::{ConditionalError, ConditionalSpec};
use crate::dist::ErrorModel;
use crate::estimator::{self, SimulationSummary};
use crate::gof::{self, GofError, GofReport};
use crate::quad::QuadError;
use crate::threshold::{self, ThresholdError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Exit code for invalid flag values.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for unreadable or malformed input data.
pub const EXIT_INPUT: i32 = 3;
/// Exit code for numeric non-convergence.
pub const EXIT_CONVERGENCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ThresholdError> for CliError {
    fn from(e: ThresholdError) -> Self {
        match e {
            ThresholdError::NoConvergence { .. } => CliError::Convergence(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ConditionalError> for CliError {
    fn from(e: ConditionalError) -> Self {
        match e {
            ConditionalError::Quad(QuadError::BudgetExhausted { .. }) => {
                CliError::Convergence(e.to_string())
            }
            ConditionalError::Threshold(t) => t.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GofError> for CliError {
    fn from(e: GofError) -> Self {
        match e {
            GofError::EmptySample | GofError::NonFinite(_) => CliError::Input(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Normal,
    Laplace,
}

impl From<ModelArg> for ErrorModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Normal => ErrorModel::Normal,
            ModelArg::Laplace => ErrorModel::Laplace,
        }
    }
}

/// Fully parsed invocation.
#[derive(Debug, Parser)]
#[command(
    name = "triplicate",
    version,
    about = "Duplicate-assay protocol analysis"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Left end of the evaluation grid.
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub grid_min: f64,
    /// Right end of the evaluation grid.
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub grid_max: f64,
    /// Grid step.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-sided tail quantiles of the standardized laws (3-decimal table).
    Table1 {
        /// Output file (stdout if omitted).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the duplicate-difference threshold r(α).
    Threshold {
        /// Rejection rate α.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Restrict to one model (both if omitted).
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Tabulate g, h, and exceedance curves (one CSV per model).
    Density {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[command(flatten)]
        grid: GridArgs,
        /// Quadrature tolerance per density evaluation.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Directory receiving density_<model>.csv.
        #[arg(short, long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Upper-tail probabilities P(μ̂ > x | rejection) for both models.
    Exceedance {
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Seeded protocol simulation: summary JSON plus conditional histogram.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Number of protocol executions.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, env = "TRIPLICATE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a histogram CSV of the conditional μ̂ samples.
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        bin_width: f64,
    },
    /// Goodness-of-fit reports for both error models from paired-assay CSV.
    Gof {
        /// Input CSV with header x1,x2 (or a diff column, see --diff-column).
        #[arg(short, long)]
        input: PathBuf,
        /// Read a single `diff` column instead of x1,x2 pairs.
        #[arg(long)]
        diff_column: bool,
        /// Prescribed per-assay standard deviation.
        #[arg(long, default_value_t = 0.4)]
        sigma: f64,
        /// Monte Carlo replications per model.
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        #[arg(long, env = "TRIPLICATE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic paired-assay dataset.
    GenData {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Number of batches.
        #[arg(long, default_value_t = 199)]
        n: usize,
        /// True value common to all batches.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.4)]
        sigma: f64,
        #[arg(long, env = "TRIPLICATE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Execute one parsed invocation.
pub fn run(config: RunConfig) -> Result<(), CliError> {
    match config.command {
        Command::Table1 { output } => {
            let mut out = String::from("alpha,normal,laplace\n");
            for row in threshold::table1() {
                let _ = writeln!(out, "{},{:.3},{:.3}", row.alpha, row.normal, row.laplace);
            }
            emit(output.as_deref(), &out)
        }
        Command::Threshold {
            alpha,
            model,
            output,
        } => {
            check_alpha(alpha)?;
            let mut out = String::from("model,alpha,r,two_sided\n");
            for m in selected(model) {
                let t = threshold::r_of_alpha(m, alpha)?;
                let q = threshold::two_sided_quantile(m, alpha)?;
                let _ = writeln!(out, "{m},{alpha},{},{}", sig10(t.r), sig10(q));
            }
            emit(output.as_deref(), &out)
        }
        Command::Density {
            alpha,
            model,
            grid,
            tol,
            out_dir,
        } => {
            check_alpha(alpha)?;
            check_tol(tol)?;
            let xs = build_grid(&grid)?;
            std::fs::create_dir_all(&out_dir)?;
            for m in selected(model) {
                let spec = ConditionalSpec::new(m, alpha)?.with_tol(tol);
                let curve = spec.curve(&xs)?;
                let mut out = String::from("x,g_plus,g_minus,h,exceedance\n");
                for i in 0..curve.xs.len() {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        sig10(curve.xs[i]),
                        sig10(curve.g_plus[i]),
                        sig10(curve.g_minus[i]),
                        sig10(curve.h[i]),
                        sig10(curve.exceedance[i]),
                    );
                }
                let path = out_dir.join(format!("density_{m}.csv"));
                std::fs::write(&path, out)?;
            }
            Ok(())
        }
        Command::Exceedance {
            alpha,
            grid,
            tol,
            output,
        } => {
            check_alpha(alpha)?;
            check_tol(tol)?;
            let xs = build_grid(&grid)?;
            let mut columns = Vec::new();
            for m in ErrorModel::ALL {
                let spec = ConditionalSpec::new(m, alpha)?.with_tol(tol);
                columns.push(spec.curve(&xs)?.exceedance);
            }
            let mut out = String::from("x,normal,laplace\n");
            for (i, &x) in xs.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    sig10(x),
                    sig10(columns[0][i]),
                    sig10(columns[1][i])
                );
            }
            emit(output.as_deref(), &out)
        }
        Command::Simulate {
            model,
            alpha,
            samples,
            seed,
            output,
            histogram,
            bin_width,
        } => {
            check_alpha(alpha)?;
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            if !(bin_width.is_finite() && bin_width > 0.0) {
                return Err(CliError::Usage(format!(
                    "--bin-width must be positive, got {bin_width}"
                )));
            }
            let summary = estimator::simulate(model.into(), alpha, samples, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(path) = histogram {
                let out = histogram_csv(&summary.conditional_samples, bin_width)?;
                std::fs::write(path, out)?;
            }
            let json = to_json(&rounded_summary(&summary))?;
            emit(output.as_deref(), &json)
        }
        Command::Gof {
            input,
            diff_column,
            sigma,
            reps,
            seed,
            output,
        } => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(CliError::Usage(format!(
                    "--sigma must be positive, got {sigma}"
                )));
            }
            if reps == 0 {
                return Err(CliError::Usage("--reps must be at least 1".into()));
            }
            let differences = read_differences(&input, diff_column)?;
            let (normal, laplace) = gof::gof_report(&differences, sigma, reps, seed)?;
            let json = to_json(&GofPair {
                normal: rounded_report(&normal),
                laplace: rounded_report(&laplace),
            })?;
            emit(output.as_deref(), &json)
        }
        Command::GenData {
            model,
            n,
            mu,
            sigma,
            seed,
            output,
        } => {
            let pairs = gof::synthetic_pairs(model.into(), n, mu, sigma, seed)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let mut out = String::from("x1,x2\n");
            for (x1, x2) in pairs {
                let _ = writeln!(out, "{},{}", sig10(x1), sig10(x2));
            }
            emit(output.as_deref(), &out)
        }
    }
}

#[derive(Serialize)]
struct GofPair {
    normal: GofReport,
    laplace: GofReport,
}

fn selected(model: Option<ModelArg>) -> Vec<ErrorModel> {
    match model {
        Some(m) => vec![m.into()],
        None => ErrorModel::ALL.to_vec(),
    }
}

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--alpha must lie strictly inside (0, 1), got {alpha}"
        )))
    }
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )))
    }
}

fn build_grid(grid: &GridArgs) -> Result<Vec<f64>, CliError> {
    let GridArgs {
        grid_min,
        grid_max,
        step,
    } = *grid;
    if !(grid_min.is_finite() && grid_max.is_finite() && grid_min < grid_max) {
        return Err(CliError::Usage(format!(
            "grid bounds must be finite with min < max, got [{grid_min}, {grid_max}]"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!(
            "--step must be positive, got {step}"
        )));
    }
    let points = (grid_max - grid_min) / step;
    if points > 10_000_000.0 {
        return Err(CliError::Usage(format!(
            "grid of {points:.0} points is unreasonably fine; increase --step"
        )));
    }
    let count = points.round() as usize;
    Ok((0..=count).map(|k| grid_min + k as f64 * step).collect())
}

/// 10 significant digits, scientific notation.
fn sig10(x: f64) -> String {
    format!("{x:.9e}")
}

fn round_sig10(x: f64) -> f64 {
    format!("{x:.9e}").parse().unwrap()
}

fn rounded_summary(s: &SimulationSummary) -> SimulationSummary {
    SimulationSummary {
        model: s.model,
        alpha: s.alpha,
        r: round_sig10(s.r),
        n: s.n,
        seed: s.seed,
        rejection_rate: round_sig10(s.rejection_rate),
        conditional_count: s.conditional_count,
        mean: s.mean.map(round_sig10),
        variance: s.variance.map(round_sig10),
        conditional_samples: Vec::new(),
    }
}

fn rounded_report(r: &GofReport) -> GofReport {
    GofReport {
        model: r.model,
        n: r.n,
        t_n: round_sig10(r.t_n),
        p_value: round_sig10(r.p_value),
        reps: r.reps,
        seed: r.seed,
        sample_mean: round_sig10(r.sample_mean),
        sample_sd: round_sig10(r.sample_sd),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn histogram_csv(xs: &[f64], bin_width: f64) -> Result<String, CliError> {
    let mut out = String::from("bin_lo,bin_hi,count,density\n");
    if xs.is_empty() {
        return Ok(out);
    }
    let idx = |x: f64| (x / bin_width).floor() as i64;
    let (mut k_min, mut k_max) = (i64::MAX, i64::MIN);
    for &x in xs {
        let k = idx(x);
        k_min = k_min.min(k);
        k_max = k_max.max(k);
    }
    let span = k_max.saturating_sub(k_min).saturating_add(1);
    if span > 10_000_000 {
        return Err(CliError::Usage(format!(
            "{span} histogram bins is unreasonably fine; increase --bin-width"
        )));
    }
    let mut counts = vec![0u64; span as usize];
    for &x in xs {
        counts[(idx(x) - k_min) as usize] += 1;
    }
    let total = xs.len() as f64;
    for (i, &count) in counts.iter().enumerate() {
        let lo = (k_min + i as i64) as f64 * bin_width;
        let _ = writeln!(
            out,
            "{},{},{},{}",
            sig10(lo),
            sig10(lo + bin_width),
            count,
            sig10(count as f64 / (total * bin_width))
        );
    }
    Ok(out)
}

fn read_differences(path: &Path, diff_column: bool) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| CliError::Input(format!("{}: missing column '{name}'", path.display())))
    };

    let parse = |field: &str, row: usize| {
        field.parse::<f64>().map_err(|_| {
            CliError::Input(format!(
                "{}: row {}: cannot parse '{}' as a number",
                path.display(),
                row + 2,
                field
            ))
        })
    };

    let mut differences = Vec::new();
    if diff_column {
        let d = col("diff")?;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            differences.push(parse(&record[d], i)?);
        }
    } else {
        let c1 = col("x1")?;
        let c2 = col("x2")?;
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            differences.push(parse(&record[c1], i)? - parse(&record[c2], i)?);
        }
    }
    if differences.is_empty() {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    Ok(differences)
}

fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_expected_length_and_order() {
        let xs = build_grid(&GridArgs {
            grid_min: -4.0,
            grid_max: 4.0,
            step: 0.01,
        })
        .unwrap();
        assert_eq!(xs.len(), 801);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(xs[0], -4.0);
        assert!((xs[800] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_arguments() {
        assert!(build_grid(&GridArgs {
            grid_min: 1.0,
            grid_max: 0.0,
            step: 0.1
        })
        .is_err());
        assert!(build_grid(&GridArgs {
            grid_min: 0.0,
            grid_max: 1.0,
            step: 0.0
        })
        .is_err());
    }

    #[test]
    fn sig10_is_ten_significant_digits() {
        assert_eq!(sig10(0.5), "5.000000000e-1");
        assert_eq!(sig10(-2.7718080908), "-2.771808091e0");
    }

    #[test]
    fn histogram_accounts_for_every_sample() {
        let xs = [-0.25, -0.05, 0.0, 0.05, 0.15, 1.0];
        let csv = histogram_csv(&xs, 0.1).unwrap();
        let total: u64 = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(total, xs.len() as u64);
    }

    #[test]
    fn round_sig10_truncates_noise() {
        assert_eq!(round_sig10(0.1 + 0.2), 0.3);
        assert_eq!(round_sig10(0.0), 0.0);
    }
}
