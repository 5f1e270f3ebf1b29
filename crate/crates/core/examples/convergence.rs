//! Runs a reduced convergence experiment (three seeds) and prints where
//! each median curve reaches 90% of its final value.
//!
//! ```text
//! cargo run --release --example convergence [iterations] [out_dir]
//! ```

use std::path::PathBuf;

use qrl_dsa::experiment::{iterations_to_fraction, run_convergence, ExperimentConfig};

fn main() -> qrl_dsa::Result<()> {
    let mut args = std::env::args().skip(1);
    let iterations = args.next().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("qrl-dsa-convergence"));

    let mut config = ExperimentConfig {
        seeds: vec![0, 1, 2],
        output_dir: out,
        ..ExperimentConfig::default()
    };
    config.train.iterations = iterations;

    let report = run_convergence(&config)?;
    for curve in &report.curves {
        let final_value = curve.median.last().copied().unwrap_or(0.0);
        let reach = iterations_to_fraction(&curve.median, 0.9);
        println!(
            "{}: final median {final_value:.3e} bit/s, 90% reached at {}",
            curve.agent,
            reach.map_or("never".into(), |i| format!("iteration {i}"))
        );
    }
    for path in report.files() {
        println!("wrote {}", path.display());
    }
    Ok(())
}
