//! Solving the duplicate-rejection threshold r(α): the value making
//! P(|X₁ − X₂| > r) = α for a pair of independent assays.
//!
//! Not the same thing as the single-observation two-sided quantile: the
//! difference of two unit-variance errors has variance 2 and its own tail
//! shape. Both are printed side by side to make the distinction visible.
//!
//! ```bash
//! cargo run --example thresholds
//! ```

use triplicate::dist::ErrorModel;
use triplicate::threshold::{r_of_alpha, two_sided_quantile};

fn main() {
    println!(
        "{:>7}  {:>18}  {:>18}",
        "alpha", "normal r / t", "laplace r / t"
    );
    for alpha in [0.10, 0.05, 0.025, 0.01, 0.005, 0.001] {
        let mut cells = Vec::new();
        for model in ErrorModel::ALL {
            let t = r_of_alpha(model, alpha).expect("solver");
            let q = two_sided_quantile(model, alpha).expect("quantile");
            let residual = model.diff_tail(t.r).unwrap() - alpha;
            assert!(residual.abs() <= 1e-10);
            cells.push(format!("{:>8.4} / {:>7.4}", t.r, q));
        }
        println!("{alpha:>7}  {:>18}  {:>18}", cells[0], cells[1]);
    }
    println!();
    println!("r: difference quantile (what the protocol compares |X1 - X2| against)");
    println!("t: single-observation two-sided quantile (what tail tables print)");
}
