//! The measurement protocol end to end: a few worked executions, then a
//! seeded Monte Carlo study checking the simulated conditional law of μ̂
//! against the quadrature density.
//!
//! ```bash
//! cargo run --release --example protocol_simulation
//! ```

use triplicate::conditional::ConditionalSpec;
use triplicate::dist::ErrorModel;
use triplicate::estimator::{conditional_sample, estimate, simulate};

fn main() {
    // hand-run the decision rule
    let r = 2.0;
    for (x1, x2) in [(0.1, -0.1), (3.0, 0.0), (0.0, 3.0)] {
        let out = estimate(x1, x2, || 2.5, r).expect("estimate");
        println!(
            "x1 = {x1:>4}, x2 = {x2:>4}: {} -> mu_hat = {}",
            if out.rejected {
                "third assay drawn"
            } else {
                "pair accepted   "
            },
            out.mu_hat
        );
    }

    let model = ErrorModel::Normal;
    let alpha = 0.05;
    let summary = simulate(model, alpha, 1_000_000, 42).expect("simulate");
    println!(
        "\n{model} protocol, alpha = {alpha}: rejection rate {:.4} over {} runs (r = {:.4})",
        summary.rejection_rate, summary.n, summary.r
    );
    println!(
        "conditional mu_hat: count {}, mean {:+.5}, variance {:.5}",
        summary.conditional_count,
        summary.mean.unwrap(),
        summary.variance.unwrap()
    );

    // histogram of conditional samples against the quadrature density
    let spec = ConditionalSpec::new(model, alpha).expect("spec");
    let samples = conditional_sample(model, alpha, 200_000, 43).expect("samples");
    let bin = 0.25;
    let m = samples.len() as f64;
    println!(
        "\n{:>6}  {:>9}  {:>9}  histogram vs quadrature",
        "x", "empirical", "h(x)"
    );
    for k in -8..8 {
        let lo = k as f64 * bin;
        let count = samples.iter().filter(|&&z| z >= lo && z < lo + bin).count();
        let density = count as f64 / (m * bin);
        let h_mid = spec.h(lo + 0.5 * bin).expect("h");
        let bar = "#".repeat((density * 60.0).round() as usize);
        println!(
            "{:>6.2}  {density:>9.4}  {h_mid:>9.4}  {bar}",
            lo + 0.5 * bin
        );
    }
    println!("\nThe dip at zero is real: given a rejected pair under normal errors,");
    println!("the reported value is most likely to land near ±1, not at the truth.");
}
