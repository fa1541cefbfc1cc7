use clap::Parser;
use triplicate::cli::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    if let Err(e) = run(config) {
        eprintln!("triplicate: {e}");
        std::process::exit(e.exit_code());
    }
}
