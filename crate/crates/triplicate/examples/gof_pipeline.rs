//! Which error law do duplicate assays actually follow? The full
//! goodness-of-fit pipeline on a synthetic 199-batch dataset: standardize
//! the pair differences, compute the variance-weighted KS statistic
//! against each candidate law, and calibrate p-values by Monte Carlo.
//!
//! ```bash
//! cargo run --release --example gof_pipeline
//! ```

use triplicate::dist::ErrorModel;
use triplicate::gof::{gof_report, standardize, synthetic_pairs};

fn main() {
    // 199 batches with Laplace measurement error, sigma = 0.4
    let pairs = synthetic_pairs(ErrorModel::Laplace, 199, 14.0, 0.4, 7).expect("pairs");
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();

    let sample = standardize(&diffs, 0.4).expect("standardize");
    println!(
        "199 batches: standardized differences have mean {:+.3} and sd {:.3} (≈ √2 = 1.414)",
        sample.mean, sample.sd
    );

    let (normal, laplace) = gof_report(&diffs, 0.4, 100_000, 7).expect("report");
    println!("\n{:>8}  {:>7}  {:>9}", "model", "T_n", "p-value");
    for report in [&normal, &laplace] {
        println!(
            "{:>8}  {:>7.3}  {:>9.4}",
            report.model.to_string(),
            report.t_n,
            report.p_value
        );
    }

    let verdict = if laplace.p_value > normal.p_value {
        "the Laplace error law"
    } else {
        "the normal error law"
    };
    println!("\nAt 100000 Monte Carlo replications the data supports {verdict}.");
    println!("(The generator really was Laplace; the test recovers it.)");
}
