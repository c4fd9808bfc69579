//! Evaluates along a drift from a benign to a cliff-heavy distribution.
//! Usage: cargo run --example drift [CONFIG]

use agilab::harness::{drift_sweep, ExperimentConfig, Results};

fn main() -> agilab::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/drift.toml").into());
    let cfg = ExperimentConfig::load(path)?;
    for (t, r) in drift_sweep(&cfg)?.iter().enumerate() {
        let g = match &r.results {
            Results::Evaluate { generality, .. } => generality.mean,
            _ => f64::NAN,
        };
        let v = r.verdict.map(|v| v.to_string()).unwrap_or_default();
        println!("t = {t}  G = {g:.4}  G1 {v}");
    }
    Ok(())
}
