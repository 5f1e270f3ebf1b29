//! Spectrum environment: link budget golden values, draw statistics and
//! the reward table.

use qrl_dsa::env::{
    dbm_to_watts, init_env, link_rate, los_probability, path_loss, Action, NetworkConfig, OBSERVATION_DIM,
};

#[test]
fn link_budget_golden_values() {
    let cfg = NetworkConfig::default();
    // 20·log10(4π · 2 GHz / 3e8 m/s) at the 1 m reference.
    let fspl_1m = 38.462_4;
    assert!((path_loss(1.0, cfg.carrier_hz, true, &cfg) - fspl_1m).abs() < 1e-4);
    assert!((path_loss(100.0, cfg.carrier_hz, true, &cfg) - (fspl_1m + 40.0)).abs() < 1e-4);
    assert!((path_loss(100.0, cfg.carrier_hz, false, &cfg) - (fspl_1m + 70.0)).abs() < 1e-4);
    // Sub-metre distances clamp to the reference.
    assert_eq!(path_loss(0.2, cfg.carrier_hz, true, &cfg), path_loss(1.0, cfg.carrier_hz, true, &cfg));

    assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    assert!((dbm_to_watts(-114.0) - 3.981_071_705_534_97e-15).abs() < 1e-27);

    // 23 dBm over 100 m LoS against -114 dBm noise: SNR = 23 + 114 - 78.4624 dB.
    let snr = 10f64.powf((23.0 + 114.0 - (fspl_1m + 40.0)) / 10.0);
    let expected = 20e6 * (1.0 + snr).log2();
    let rate = link_rate(23.0, 100.0, 0.0, &cfg, true).unwrap();
    assert!((rate - expected).abs() / expected < 1e-5, "{rate} vs {expected}");

    let interfered = link_rate(23.0, 100.0, dbm_to_watts(-80.0), &cfg, true).unwrap();
    assert!(interfered < rate);
    assert!(link_rate(23.0, 0.0, 0.0, &cfg, true).is_err());
    assert!(link_rate(23.0, 10.0, -1.0, &cfg, true).is_err());

    assert!((los_probability(150.0, &cfg) - (-1f64).exp()).abs() < 1e-15);
}

#[test]
fn draw_frequencies_match_configuration() {
    let cfg = NetworkConfig::default();
    let (mut env, _) = init_env(&cfg, 42).unwrap();
    let slots = 100_000;
    let (mut active, mut protected) = (0usize, 0usize);
    for i in 0..slots {
        let action = if i % 3 == 0 { Action::Idle } else { Action::Transmit };
        let out = env.step(action);
        if !out.channel_idle {
            active += 1;
            if out.observation[2] > 0.0 {
                protected += 1;
            }
        }
        if action == Action::Idle {
            assert_eq!(out.reward, 0.0);
            assert!(!out.collision);
        }
    }
    let access = active as f64 / slots as f64;
    let protection = protected as f64 / active as f64;
    assert!((0.69..=0.71).contains(&access), "access {access}");
    assert!((0.49..=0.51).contains(&protection), "protection {protection}");
}

#[test]
fn reward_table() {
    let cfg = NetworkConfig {
        collision_reward: -5.0,
        ..NetworkConfig::default()
    };
    let (mut env, _) = init_env(&cfg, 3).unwrap();
    let (clear, shared) = (env.interference_free_rate(), env.shared_rate());
    assert!(clear > shared && shared > 0.0);
    let (mut seen_clear, mut seen_shared, mut seen_collision) = (false, false, false);
    for _ in 0..200 {
        let out = env.step(Action::Transmit);
        let busy = out.observation[1] > 0.0;
        let protected = out.observation[2] > 0.0;
        if !busy {
            assert_eq!(out.reward, clear);
            seen_clear = true;
        } else if protected {
            assert_eq!(out.reward, shared);
            seen_shared = true;
        } else {
            assert_eq!(out.reward, -5.0);
            assert!(out.collision);
            seen_collision = true;
        }
    }
    assert!(seen_clear && seen_shared && seen_collision);
}

#[test]
fn observations_are_bounded_and_topology_is_static() {
    let cfg = NetworkConfig::default();
    let (mut env, first) = init_env(&cfg, 9).unwrap();
    assert_eq!(first.len(), OBSERVATION_DIM);
    assert_eq!(&first[..3], &[-1.0, -1.0, -1.0]);
    let topology = *env.topology();
    let [lo, hi] = cfg.d2d_bs_distance_range;
    assert!((lo..hi).contains(&topology.d2d_bs_distance));
    let [lo, hi] = cfg.d2d_pair_distance_range;
    assert!((lo..hi).contains(&topology.d2d_pair_distance));
    for _ in 0..500 {
        let out = env.step(Action::Transmit);
        assert!(out.observation.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(out.observation[0], 1.0);
        assert_eq!(*env.topology(), topology);
    }
    assert_eq!(env.slot(), 500);
    env.reset();
    assert_eq!(env.slot(), 0);
    assert_ne!(*env.topology(), topology);
}

#[test]
fn environment_draws_ignore_actions() {
    let cfg = NetworkConfig::default();
    let (mut a, _) = init_env(&cfg, 5).unwrap();
    let (mut b, _) = init_env(&cfg, 5).unwrap();
    for i in 0..1000 {
        let x = a.step(Action::Idle);
        let y = b.step(if i % 2 == 0 { Action::Transmit } else { Action::Idle });
        assert_eq!(x.channel_idle, y.channel_idle);
        assert_eq!(x.observation[1..], y.observation[1..]);
    }
}

#[test]
fn degenerate_probabilities() {
    for (alpha, expect_idle) in [(0.0, true), (1.0, false)] {
        let cfg = NetworkConfig {
            alpha,
            ..NetworkConfig::default()
        };
        let (mut env, _) = init_env(&cfg, 1).unwrap();
        for _ in 0..1000 {
            assert_eq!(env.step(Action::Transmit).channel_idle, expect_idle);
        }
    }
    let bad = NetworkConfig {
        beta: 1.2,
        ..NetworkConfig::default()
    };
    assert!(init_env(&bad, 0).unwrap_err().is_config());
}
