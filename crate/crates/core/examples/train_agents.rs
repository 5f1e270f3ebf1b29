//! Trains the quantum and classical agents on one seed with a short budget
//! and prints their learning curves at a few checkpoints.
//!
//! ```text
//! cargo run --release --example train_agents [iterations]
//! ```

use qrl_dsa::env::NetworkConfig;
use qrl_dsa::experiment::ExperimentConfig;
use qrl_dsa::rl::{train_agent, Agent, TrainConfig};

fn main() -> qrl_dsa::Result<()> {
    let iterations = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(8_000);
    let network = NetworkConfig::default();
    let train = TrainConfig {
        iterations,
        ..TrainConfig::default()
    };

    for kind in ExperimentConfig::default().agents() {
        let outcome = train_agent(&network, &kind, &train, 0)?;
        let curve = outcome.metrics.running_average();
        print!("{}:", kind.label());
        for i in (0..iterations).step_by((iterations / 5).max(1)) {
            print!("  t={i} {:.3e}", curve[i]);
        }
        println!("  final {:.3e} bit/s", outcome.metrics.final_throughput());

        let greedy: Vec<usize> = [[-1.0, -1.0, -1.0, 0.0], [1.0, 1.0, -1.0, 0.0], [1.0, 1.0, 1.0, 0.5]]
            .iter()
            .map(|obs| outcome.agent.act(obs))
            .collect::<qrl_dsa::Result<_>>()?;
        let model = match &outcome.agent {
            Agent::Vqc { .. } => "circuit",
            Agent::Mlp(_) => "network",
        };
        println!("  greedy actions of the trained {model} on three probe states: {greedy:?}");
    }
    Ok(())
}
