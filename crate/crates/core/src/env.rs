//! Slot-based simulator of one D2D pair sharing cellular spectrum.
//!
//! Each slot, a cellular UE accesses the shared band with probability
//! `alpha`; an active UE sits in the base station's protected area with
//! probability `beta`. The D2D transmitter picks IDLE or TRANSMIT before the
//! slot's draws are revealed and observes them afterwards:
//!
//! * IDLE: reward 0.
//! * TRANSMIT, band idle: Shannon rate of the D2D link, no interference.
//! * TRANSMIT, UE active and protected: Shannon rate with the base-station
//!   downlink added to the noise floor.
//! * TRANSMIT, UE active and unprotected: collision, reward
//!   `collision_reward` (default 0).
//!
//! Path loss is a log-distance model whose exponent depends on a LoS/NLoS
//! flag drawn once per link per episode with `P(LoS) = exp(-d / los_decay_m)`.
//! The topology is fixed within an episode; [`SpectrumEnv::reset`] starts a
//! new episode with a fresh topology.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Speed of light used by the free-space reference term, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Number of observation features.
pub const OBSERVATION_DIM: usize = 4;

/// Number of actions (IDLE, TRANSMIT).
pub const N_ACTIONS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub alpha: f64,
    pub beta: f64,
    pub d2d_bs_distance_range: [f64; 2],
    pub d2d_pair_distance_range: [f64; 2],
    pub bs_power_dbm: f64,
    pub d2d_power_dbm: f64,
    pub noise_dbm: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub los_decay_m: f64,
    pub pl_exponent_los: f64,
    pub pl_exponent_nlos: f64,
    pub collision_reward: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            alpha: 0.7,
            beta: 0.5,
            d2d_bs_distance_range: [100.0, 1000.0],
            d2d_pair_distance_range: [20.0, 100.0],
            bs_power_dbm: 40.0,
            d2d_power_dbm: 23.0,
            noise_dbm: -114.0,
            carrier_hz: 2e9,
            bandwidth_hz: 20e6,
            los_decay_m: 150.0,
            pl_exponent_los: 2.0,
            pl_exponent_nlos: 3.5,
            collision_reward: 0.0,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, p) in [("network.alpha", self.alpha), ("network.beta", self.beta)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(key, format!("probability must be in [0, 1], got {p}")));
            }
        }
        for (key, [lo, hi]) in [
            ("network.d2d_bs_distance_range", self.d2d_bs_distance_range),
            ("network.d2d_pair_distance_range", self.d2d_pair_distance_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return Err(Error::config(
                    key,
                    format!("need 0 < min <= max, got [{lo}, {hi}]"),
                ));
            }
        }
        for (key, v) in [
            ("network.bs_power_dbm", self.bs_power_dbm),
            ("network.d2d_power_dbm", self.d2d_power_dbm),
            ("network.noise_dbm", self.noise_dbm),
            ("network.collision_reward", self.collision_reward),
        ] {
            if !v.is_finite() {
                return Err(Error::config(key, format!("must be finite, got {v}")));
            }
        }
        for (key, v) in [
            ("network.carrier_hz", self.carrier_hz),
            ("network.bandwidth_hz", self.bandwidth_hz),
            ("network.los_decay_m", self.los_decay_m),
            ("network.pl_exponent_los", self.pl_exponent_los),
            ("network.pl_exponent_nlos", self.pl_exponent_nlos),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// `10^((p_dbm - 30) / 10)`.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// `B · log2(1 + sinr)`.
pub fn shannon_capacity(bandwidth_hz: f64, sinr: f64) -> f64 {
    bandwidth_hz * (1.0 + sinr).log2()
}

/// Probability that a link of length `distance_m` has line of sight.
pub fn los_probability(distance_m: f64, config: &NetworkConfig) -> f64 {
    (-distance_m / config.los_decay_m).exp()
}

/// Log-distance path loss in dB with a 1 m free-space reference:
/// `20·log10(4π·f/c) + 10·n·log10(d)`. Distances below 1 m are clamped to
/// 1 m.
pub fn path_loss(distance_m: f64, carrier_hz: f64, los: bool, config: &NetworkConfig) -> f64 {
    let d = distance_m.max(1.0);
    let exponent = if los {
        config.pl_exponent_los
    } else {
        config.pl_exponent_nlos
    };
    20.0 * (4.0 * PI * carrier_hz / SPEED_OF_LIGHT).log10() + 10.0 * exponent * d.log10()
}

/// Received power in watts at `distance_m` from a `tx_power_dbm` source.
pub fn received_power(tx_power_dbm: f64, distance_m: f64, los: bool, config: &NetworkConfig) -> f64 {
    dbm_to_watts(tx_power_dbm - path_loss(distance_m, config.carrier_hz, los, config))
}

/// Shannon rate in bits/s of a link with `interference_w` added to noise.
pub fn link_rate(
    tx_power_dbm: f64,
    distance_m: f64,
    interference_w: f64,
    config: &NetworkConfig,
    los: bool,
) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::usage(format!("link distance must be positive, got {distance_m}")));
    }
    if !(interference_w >= 0.0) {
        return Err(Error::usage(format!("interference must be nonnegative, got {interference_w}")));
    }
    let signal = received_power(tx_power_dbm, distance_m, los, config);
    let sinr = signal / (dbm_to_watts(config.noise_dbm) + interference_w);
    Ok(shannon_capacity(config.bandwidth_hz, sinr))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Idle = 0,
    Transmit = 1,
}

impl Action {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<usize> for Action {
    type Error = Error;

    fn try_from(index: usize) -> Result<Self> {
        match index {
            0 => Ok(Action::Idle),
            1 => Ok(Action::Transmit),
            other => Err(Error::usage(format!("action index {other} is not 0 (IDLE) or 1 (TRANSMIT)"))),
        }
    }
}

/// Geometry of one episode. The D2D receiver's distance to the base
/// station is approximated by the transmitter's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topology {
    pub d2d_bs_distance: f64,
    pub d2d_pair_distance: f64,
    pub d2d_link_los: bool,
    pub bs_link_los: bool,
}

/// Agent-visible features, each in `[-1, 1]`:
/// `[last_action, last_channel_busy, last_ue_protected, d2d_bs_distance]`.
/// Flags map false → −1 and true → +1; the distance is min-max scaled over
/// its configured range (0 for a degenerate range).
pub type Observation = [f64; OBSERVATION_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    /// bits/s
    pub reward: f64,
    pub collision: bool,
    pub channel_idle: bool,
}

/// Simulator state: configuration, episode topology, last-slot flags and
/// the environment RNG stream.
#[derive(Debug, Clone)]
pub struct SpectrumEnv {
    config: NetworkConfig,
    rng: ChaCha8Rng,
    topology: Topology,
    slot: u64,
    last_action: Action,
    last_ue_active: bool,
    last_ue_protected: bool,
    /// Interference-free rate and rate under BS interference for this
    /// episode's topology.
    clear_rate: f64,
    shared_rate: f64,
}

/// Creates an environment whose draws come from `seed`'s environment stream.
pub fn init_env(config: &NetworkConfig, seed: u64) -> Result<(SpectrumEnv, Observation)> {
    config.validate()?;
    let mut env = SpectrumEnv {
        config: config.clone(),
        rng: stream_rng(seed, Stream::Environment),
        topology: Topology {
            d2d_bs_distance: 0.0,
            d2d_pair_distance: 0.0,
            d2d_link_los: false,
            bs_link_los: false,
        },
        slot: 0,
        last_action: Action::Idle,
        last_ue_active: false,
        last_ue_protected: false,
        clear_rate: 0.0,
        shared_rate: 0.0,
    };
    let obs = env.reset();
    Ok((env, obs))
}

fn sample_range(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

impl SpectrumEnv {
    /// Starts a new episode: resamples the topology and clears the last-slot
    /// fields.
    pub fn reset(&mut self) -> Observation {
        let d2d_bs_distance = sample_range(&mut self.rng, self.config.d2d_bs_distance_range);
        let d2d_pair_distance = sample_range(&mut self.rng, self.config.d2d_pair_distance_range);
        let d2d_link_los = self.rng.gen::<f64>() < los_probability(d2d_pair_distance, &self.config);
        let bs_link_los = self.rng.gen::<f64>() < los_probability(d2d_bs_distance, &self.config);
        self.topology = Topology {
            d2d_bs_distance,
            d2d_pair_distance,
            d2d_link_los,
            bs_link_los,
        };
        let cfg = &self.config;
        let bs_interference = received_power(cfg.bs_power_dbm, d2d_bs_distance, bs_link_los, cfg);
        self.clear_rate = link_rate(cfg.d2d_power_dbm, d2d_pair_distance, 0.0, cfg, d2d_link_los)
            .expect("validated positive distance");
        self.shared_rate = link_rate(cfg.d2d_power_dbm, d2d_pair_distance, bs_interference, cfg, d2d_link_los)
            .expect("validated positive distance");
        self.slot = 0;
        self.last_action = Action::Idle;
        self.last_ue_active = false;
        self.last_ue_protected = false;
        self.observation()
    }

    /// Advances one slot. The UE draws happen before the reward is computed
    /// and do not depend on `action`.
    pub fn step(&mut self, action: Action) -> StepOutcome {
        let ue_active = self.rng.gen::<f64>() < self.config.alpha;
        let ue_protected = ue_active && self.rng.gen::<f64>() < self.config.beta;
        let collision = action == Action::Transmit && ue_active && !ue_protected;
        let reward = match action {
            Action::Idle => 0.0,
            Action::Transmit if !ue_active => self.clear_rate,
            Action::Transmit if ue_protected => self.shared_rate,
            Action::Transmit => self.config.collision_reward,
        };
        self.slot += 1;
        self.last_action = action;
        self.last_ue_active = ue_active;
        self.last_ue_protected = ue_protected;
        StepOutcome {
            observation: self.observation(),
            reward,
            collision,
            channel_idle: !ue_active,
        }
    }

    pub fn observation(&self) -> Observation {
        let flag = |b: bool| if b { 1.0 } else { -1.0 };
        let [lo, hi] = self.config.d2d_bs_distance_range;
        let distance = if hi > lo {
            2.0 * (self.topology.d2d_bs_distance - lo) / (hi - lo) - 1.0
        } else {
            0.0
        };
        [
            flag(self.last_action == Action::Transmit),
            flag(self.last_ue_active),
            flag(self.last_ue_protected),
            distance.clamp(-1.0, 1.0),
        ]
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Slots elapsed in the current episode.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// D2D rate when the band is idle, bits/s.
    pub fn interference_free_rate(&self) -> f64 {
        self.clear_rate
    }

    /// D2D rate while a protected UE is served, bits/s.
    pub fn shared_rate(&self) -> f64 {
        self.shared_rate
    }
}
