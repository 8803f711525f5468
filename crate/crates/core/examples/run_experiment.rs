//! Runs an experiment config from code and prints the report as CSV.
use holo_lab::lab::{run, ExperimentConfig};

fn main() -> holo_lab::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/convergence-study.toml").to_string());
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let report = run(&cfg)?;
    print!("{}", report.to_csv()?);
    println!("{}: {}", cfg.experiment.name(), if report.verdict { "PASS" } else { "FAIL" });
    Ok(())
}
