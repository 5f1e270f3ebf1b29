//! Steps the D2D spectrum environment with the three scripted policies and
//! prints link budgets, draw frequencies and average throughput.

use qrl_dsa::env::{init_env, Action, NetworkConfig};
use qrl_dsa::rl::{run_scripted, ScriptedPolicy, TrainConfig};

fn main() -> qrl_dsa::Result<()> {
    let cfg = NetworkConfig::default();
    let (mut env, obs) = init_env(&cfg, 3)?;
    let topo = *env.topology();
    println!(
        "episode topology: D2D-BS {:.0} m ({}), D2D pair {:.0} m ({})",
        topo.d2d_bs_distance,
        if topo.bs_link_los { "LoS" } else { "NLoS" },
        topo.d2d_pair_distance,
        if topo.d2d_link_los { "LoS" } else { "NLoS" },
    );
    println!(
        "rates: idle band {:.3e} bit/s, shared with protected UE {:.3e} bit/s",
        env.interference_free_rate(),
        env.shared_rate()
    );
    println!("initial observation {obs:?}");

    let slots = 10_000;
    let (mut busy, mut collisions) = (0, 0);
    for _ in 0..slots {
        let out = env.step(Action::Transmit);
        busy += usize::from(!out.channel_idle);
        collisions += usize::from(out.collision);
    }
    println!(
        "over {slots} slots: UE active {:.3}, collisions {:.3}",
        busy as f64 / slots as f64,
        collisions as f64 / slots as f64
    );

    let train = TrainConfig {
        iterations: 20_000,
        ..TrainConfig::default()
    };
    for policy in ScriptedPolicy::ALL {
        let log = run_scripted(&cfg, policy, &train, 3)?;
        println!("{policy:>16}: final running average {:.3e} bit/s", log.final_throughput());
    }
    Ok(())
}
