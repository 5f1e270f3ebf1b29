//! Saves a trained circuit and a fresh network to text checkpoints and
//! loads them back.

use qrl_dsa::checkpoint::Checkpoint;
use qrl_dsa::env::NetworkConfig;
use qrl_dsa::nn::build_mlp;
use qrl_dsa::rl::{train_agent, Agent, AgentKind, TrainConfig};
use qrl_dsa::vqc::VqcConfig;

fn main() -> qrl_dsa::Result<()> {
    let dir = std::env::temp_dir().join("qrl-dsa-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| qrl_dsa::Error::Io {
        path: dir.clone(),
        source: e,
    })?;

    let train = TrainConfig {
        iterations: 500,
        ..TrainConfig::default()
    };
    let trained = train_agent(&NetworkConfig::default(), &AgentKind::Vqc(VqcConfig::default()), &train, 1)?;
    let Agent::Vqc { model, .. } = trained.agent else {
        unreachable!("asked for a circuit agent")
    };

    let vqc_path = dir.join("vqc.ckpt");
    Checkpoint::Vqc(model.clone()).save(&vqc_path)?;
    let restored = Checkpoint::load(&vqc_path)?;
    println!("{} round trip exact: {}", vqc_path.display(), restored == Checkpoint::Vqc(model));

    let mlp = build_mlp(&[4, 64, 64, 2], 1)?;
    let mlp_path = dir.join("mlp.ckpt");
    Checkpoint::Mlp(mlp.clone()).save(&mlp_path)?;
    println!(
        "{} round trip exact: {}",
        mlp_path.display(),
        Checkpoint::load(&mlp_path)? == Checkpoint::Mlp(mlp)
    );

    let text = std::fs::read_to_string(&vqc_path).unwrap_or_default();
    println!("first lines of the circuit checkpoint:");
    for line in text.lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
