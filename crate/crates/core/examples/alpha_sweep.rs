//! Sweeps the UE access probability and prints the across-seed median
//! throughput of both agents next to the always-transmit baseline.
//!
//! ```text
//! cargo run --release --example alpha_sweep [iterations]
//! ```

use qrl_dsa::experiment::{median, run_alpha_sweep, run_baselines, ExperimentConfig};
use qrl_dsa::rl::ScriptedPolicy;

fn main() -> qrl_dsa::Result<()> {
    let iterations = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3_000);
    let mut config = ExperimentConfig {
        seeds: vec![0, 1],
        output_dir: std::env::temp_dir().join("qrl-dsa-sweep"),
        ..ExperimentConfig::default()
    };
    config.train.iterations = iterations;
    config.sweep.alphas = vec![0.1, 0.3, 0.5, 0.7, 0.9];

    let report = run_alpha_sweep(&config)?;
    println!("{:>5}  {:>11}  {:>11}  {:>11}", "alpha", "qrl", "drl", "always-tx");
    for &alpha in &config.sweep.alphas {
        let mut at_alpha = config.clone();
        at_alpha.network.alpha = alpha;
        let baseline: Vec<f64> = run_baselines(&at_alpha)?
            .into_iter()
            .filter(|b| b.policy == ScriptedPolicy::AlwaysTransmit)
            .map(|b| b.final_throughput_bps)
            .collect();
        let row = |agent| report.row(alpha, agent).map_or(f64::NAN, |r| r.median);
        println!(
            "{alpha:>5.1}  {:>11.3e}  {:>11.3e}  {:>11.3e}",
            row("qrl"),
            row("drl"),
            median(&baseline)
        );
    }
    println!("wrote {}", report.summary_path.display());
    Ok(())
}
