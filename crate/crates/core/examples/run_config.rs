//! Runs any experiment config and prints the JSON report.
//! Usage: cargo run --example run_config -- configs/relativity.toml

use agilab::harness::{run_experiment, ExperimentConfig};

fn main() -> agilab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/relativity.toml").into());
    let report = run_experiment(&ExperimentConfig::load(path)?)?;
    println!("{}", report.to_json());
    std::process::exit(report.exit_code());
}
