//! Value-based training shared by the quantum and classical agents.
//!
//! Both agents run the same loop: ε-greedy acting, a FIFO replay buffer,
//! minibatch TD targets from a periodically synced target network, a mean
//! squared error on the taken action, and Adam. Only the Q-function differs.
//!
//! Per iteration `t` the loop:
//!
//! 1. starts a new episode (fresh topology) when `t` is a positive multiple
//!    of `episode_length`;
//! 2. draws the ε-greedy coin and a uniform action from the exploration
//!    stream (both draws always happen);
//! 3. steps the environment (environment stream);
//! 4. stores the transition, and once the buffer holds `batch_size`
//!    transitions samples a minibatch (replay stream) and takes one Adam
//!    step;
//! 5. copies the online network into the target network every
//!    `target_sync_interval` iterations.
//!
//! Streams are described in [`crate::rng`]. None of them depends on the
//! approximator, so two agents trained from the same seed see the same
//! environment realizations, exploration draws and minibatch indices.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{init_env, Action, NetworkConfig, Observation, SpectrumEnv, N_ACTIONS, OBSERVATION_DIM};
use crate::error::{Error, Result};
use crate::experiment::moving_average;
use crate::nn::{build_mlp, AdamConfig, AdamState, MlpModel};
use crate::rng::{stream_rng, Stream};
use crate::vqc::{build_vqc, VqcConfig, VqcModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    pub action: usize,
    /// Normalized reward (bits/s divided by the reward scale).
    pub reward: f64,
    pub next_observation: Observation,
    pub terminal: bool,
}

/// Bounded FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("train.buffer_capacity", "must be positive"));
        }
        Ok(Self {
            capacity,
            items: VecDeque::with_capacity(capacity),
        })
    }

    /// Appends `t`, evicting the oldest transition when full.
    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.items.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// `batch_size` transitions drawn uniformly with replacement.
    pub fn sample(&self, batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Transition> {
        (0..batch_size)
            .map(|_| self.items[rng.gen_range(0..self.items.len())])
            .collect()
    }
}

/// How the VQC agent differentiates its circuit during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    /// Two shifted circuit evaluations per rotation.
    ParameterShift,
    /// Reverse-mode sweep; numerically the same gradient, far fewer gates.
    Adjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub iterations: usize,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub target_sync_interval: usize,
    pub learning_rate_mlp: f64,
    pub learning_rate_vqc: f64,
    /// Fixed reward normalization in bits/s. When absent, each episode uses
    /// the interference-free rate of its own topology.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reward_scale: Option<f64>,
    pub episode_length: usize,
    pub average_window: usize,
    pub vqc_gradient: GradientMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 50_000,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 5_000,
            batch_size: 32,
            buffer_capacity: 10_000,
            target_sync_interval: 100,
            learning_rate_mlp: 1e-3,
            learning_rate_vqc: 1e-2,
            reward_scale: None,
            episode_length: 200,
            average_window: 1_000,
            vqc_gradient: GradientMethod::Adjoint,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("train.gamma", format!("must be in [0, 1), got {}", self.gamma)));
        }
        for (key, e) in [
            ("train.epsilon_start", self.epsilon_start),
            ("train.epsilon_end", self.epsilon_end),
        ] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(key, format!("must be in [0, 1], got {e}")));
            }
        }
        for (key, n) in [
            ("train.batch_size", self.batch_size),
            ("train.buffer_capacity", self.buffer_capacity),
            ("train.target_sync_interval", self.target_sync_interval),
            ("train.episode_length", self.episode_length),
            ("train.average_window", self.average_window),
        ] {
            if n == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::config(
                "train.buffer_capacity",
                format!("must be at least batch_size ({})", self.batch_size),
            ));
        }
        for (key, lr) in [
            ("train.learning_rate_mlp", self.learning_rate_mlp),
            ("train.learning_rate_vqc", self.learning_rate_vqc),
        ] {
            if !(lr.is_finite() && lr > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {lr}")));
            }
        }
        if let Some(scale) = self.reward_scale {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::config("train.reward_scale", format!("must be positive, got {scale}")));
            }
        }
        Ok(())
    }

    /// Linear decay from `epsilon_start` to `epsilon_end` over
    /// `epsilon_decay_steps` iterations, constant afterwards.
    pub fn epsilon(&self, iteration: usize) -> f64 {
        if self.epsilon_decay_steps == 0 || iteration >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let remaining = 1.0 - iteration as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_end + (self.epsilon_start - self.epsilon_end) * remaining
    }
}

/// ε-greedy selection. Always consumes two draws from `rng` (the coin, then
/// a uniform action) so the stream stays aligned whatever the outcome.
/// Greedy ties resolve to the lowest index.
pub fn select_action(values: &[f64], epsilon: f64, rng: &mut ChaCha8Rng) -> usize {
    let coin: f64 = rng.gen();
    let random = rng.gen_range(0..values.len());
    if coin < epsilon {
        random
    } else {
        argmax(values)
    }
}

/// Index of the largest value; the first one on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A trainable state-action value function.
pub trait QFunction {
    fn q_values(&self, observation: &[f64]) -> Result<Vec<f64>>;

    /// Action values plus the gradient of the loss whose `∂L/∂Q` is
    /// `loss_grad(values)`.
    fn value_and_gradient(
        &self,
        observation: &[f64],
        loss_grad: &dyn Fn(&[f64]) -> Vec<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>)>;

    fn parameters(&self) -> &[f64];

    fn parameters_mut(&mut self) -> &mut [f64];
}

/// `y = r + γ · max_a Q_target(s', a)`, the bootstrap term dropped on
/// terminal transitions.
pub fn td_targets(batch: &[Transition], target: &dyn QFunction, gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                Ok(t.reward)
            } else {
                let next = target.q_values(&t.next_observation)?;
                let best = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(t.reward + gamma * best)
            }
        })
        .collect()
}

/// Which approximator an agent uses.
#[derive(Debug, Clone, PartialEq)]
pub enum AgentKind {
    /// Quantum agent (QRL).
    Vqc(VqcConfig),
    /// Classical agent (DRL).
    Mlp { layer_sizes: Vec<usize> },
}

impl AgentKind {
    /// `"qrl"` or `"drl"`; used in file names and CSV columns.
    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Vqc(_) => "qrl",
            AgentKind::Mlp { .. } => "drl",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AgentKind::Vqc(config) => {
                config.validate()?;
                if config.n_qubits != OBSERVATION_DIM {
                    return Err(Error::config(
                        "vqc.n_qubits",
                        format!("must equal the {OBSERVATION_DIM} observation features, got {}", config.n_qubits),
                    ));
                }
                if config.n_actions != N_ACTIONS {
                    return Err(Error::config(
                        "vqc.n_actions",
                        format!("the environment has {N_ACTIONS} actions, got {}", config.n_actions),
                    ));
                }
            }
            AgentKind::Mlp { layer_sizes } => {
                if layer_sizes.first() != Some(&OBSERVATION_DIM) || layer_sizes.last() != Some(&N_ACTIONS) {
                    return Err(Error::config(
                        "mlp.layer_sizes",
                        format!("must start with {OBSERVATION_DIM} and end with {N_ACTIONS}, got {layer_sizes:?}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A concrete approximator.
#[derive(Debug, Clone, PartialEq)]
pub enum Agent {
    Vqc { model: VqcModel, method: GradientMethod },
    Mlp(MlpModel),
}

impl Agent {
    pub fn build(kind: &AgentKind, seed: u64, method: GradientMethod) -> Result<Self> {
        kind.validate()?;
        Ok(match kind {
            AgentKind::Vqc(config) => Agent::Vqc {
                model: build_vqc(config, seed)?,
                method,
            },
            AgentKind::Mlp { layer_sizes } => Agent::Mlp(build_mlp(layer_sizes, seed)?),
        })
    }

    /// Greedy action.
    pub fn act(&self, observation: &[f64]) -> Result<usize> {
        Ok(argmax(&self.q_values(observation)?))
    }
}

impl QFunction for Agent {
    fn q_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        match self {
            Agent::Vqc { model, .. } => model.forward(observation),
            Agent::Mlp(model) => model.forward(observation),
        }
    }

    fn value_and_gradient(
        &self,
        observation: &[f64],
        loss_grad: &dyn Fn(&[f64]) -> Vec<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Agent::Vqc {
                model,
                method: GradientMethod::Adjoint,
            } => model.value_and_gradient(observation, loss_grad),
            Agent::Vqc {
                model,
                method: GradientMethod::ParameterShift,
            } => {
                let values = model.forward(observation)?;
                let grad = model.gradient(observation, &loss_grad(&values))?;
                Ok((values, grad))
            }
            Agent::Mlp(model) => model.value_and_gradient(observation, loss_grad),
        }
    }

    fn parameters(&self) -> &[f64] {
        match self {
            Agent::Vqc { model, .. } => model.parameters(),
            Agent::Mlp(model) => model.parameters(),
        }
    }

    fn parameters_mut(&mut self) -> &mut [f64] {
        match self {
            Agent::Vqc { model, .. } => model.parameters_mut(),
            Agent::Mlp(model) => model.parameters_mut(),
        }
    }
}

/// One minibatch update: MSE between `Q(s, a_taken)` and the TD targets.
/// Returns the batch loss.
pub fn train_step(
    online: &mut Agent,
    target: &Agent,
    batch: &[Transition],
    gamma: f64,
    adam: &mut AdamState,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::usage("empty minibatch"));
    }
    let targets = td_targets(batch, target, gamma)?;
    let n = batch.len() as f64;
    let mut grad = vec![0.0; online.parameters().len()];
    let mut loss = 0.0;
    for (t, &y) in batch.iter().zip(&targets) {
        let action = t.action;
        let (values, g) = online.value_and_gradient(&t.observation, &|q: &[f64]| {
            let mut lg = vec![0.0; q.len()];
            lg[action] = 2.0 * (q[action] - y) / n;
            lg
        })?;
        let err = values[action] - y;
        loss += err * err / n;
        for (acc, gi) in grad.iter_mut().zip(&g) {
            *acc += gi;
        }
    }
    adam.step(online.parameters_mut(), &grad)?;
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub iteration: usize,
    pub instantaneous_reward_bps: f64,
    pub running_avg_throughput_bps: f64,
    pub epsilon: f64,
    /// Minibatch loss; absent before the buffer holds a full batch.
    pub loss: Option<f64>,
}

/// Column names of the per-run CSV.
pub const METRICS_COLUMNS: [&str; 5] = [
    "iteration",
    "instantaneous_reward_bps",
    "running_avg_throughput_bps",
    "epsilon",
    "loss",
];

/// Per-iteration record of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub records: Vec<MetricsRecord>,
}

impl MetricsLog {
    /// Fills `running_avg_throughput_bps` with the trailing `window`-mean of
    /// the instantaneous rewards.
    fn with_running_average(mut records: Vec<MetricsRecord>, window: usize) -> Self {
        let rewards: Vec<f64> = records.iter().map(|r| r.instantaneous_reward_bps).collect();
        let averaged = moving_average(&rewards, window).expect("validated window");
        for (r, avg) in records.iter_mut().zip(averaged) {
            r.running_avg_throughput_bps = avg;
        }
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn running_average(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.running_avg_throughput_bps).collect()
    }

    /// Running-average throughput at the last iteration (0 when empty).
    pub fn final_throughput(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.running_avg_throughput_bps)
    }

    /// Writes `# `-prefixed `header` lines, then the CSV table.
    pub fn write_csv(&self, path: &Path, header: &[String]) -> Result<()> {
        let mut out = String::new();
        for line in header {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        let mut writer = csv::Writer::from_writer(out.into_bytes());
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        writer.write_record(METRICS_COLUMNS).map_err(csv_err)?;
        for r in &self.records {
            writer
                .write_record([
                    r.iteration.to_string(),
                    r.instantaneous_reward_bps.to_string(),
                    r.running_avg_throughput_bps.to_string(),
                    r.epsilon.to_string(),
                    r.loss.map(|l| l.to_string()).unwrap_or_default(),
                ])
                .map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Reads a file written by [`MetricsLog::write_csv`], skipping comments.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(csv_err)?;
        let bad = |what: &str| Error::Csv {
            path: path.to_path_buf(),
            source: csv::Error::from(std::io::Error::new(std::io::ErrorKind::InvalidData, what.to_string())),
        };
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row.map_err(csv_err)?;
            if row.len() != METRICS_COLUMNS.len() {
                return Err(bad("wrong column count"));
            }
            let num = |i: usize| row[i].parse::<f64>().map_err(|_| bad(&format!("bad number `{}`", &row[i])));
            records.push(MetricsRecord {
                iteration: row[0].parse().map_err(|_| bad("bad iteration"))?,
                instantaneous_reward_bps: num(1)?,
                running_avg_throughput_bps: num(2)?,
                epsilon: num(3)?,
                loss: if row[4].is_empty() { None } else { Some(num(4)?) },
            });
        }
        Ok(Self { records })
    }
}

/// Result of [`train_agent`]: the metrics plus the final online model.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub metrics: MetricsLog,
    pub agent: Agent,
}

/// Trains one agent and returns its per-iteration metrics.
pub fn train_run(
    env_config: &NetworkConfig,
    agent_kind: &AgentKind,
    train_config: &TrainConfig,
    seed: u64,
) -> Result<MetricsLog> {
    Ok(train_agent(env_config, agent_kind, train_config, seed)?.metrics)
}

/// [`train_run`] that also hands back the trained model.
pub fn train_agent(
    env_config: &NetworkConfig,
    agent_kind: &AgentKind,
    train_config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    train_config.validate()?;
    let (mut env, mut obs) = init_env(env_config, seed)?;
    let mut online = Agent::build(agent_kind, seed, train_config.vqc_gradient)?;
    let mut target = online.clone();
    let learning_rate = match agent_kind {
        AgentKind::Vqc(_) => train_config.learning_rate_vqc,
        AgentKind::Mlp { .. } => train_config.learning_rate_mlp,
    };
    let mut adam = AdamState::new(
        online.parameters().len(),
        AdamConfig {
            learning_rate,
            ..AdamConfig::default()
        },
    );
    let mut buffer = ReplayBuffer::new(train_config.buffer_capacity)?;
    let mut explore = stream_rng(seed, Stream::Exploration);
    let mut replay = stream_rng(seed, Stream::Replay);
    let mut scale = reward_scale(train_config, &env);
    let mut records = Vec::with_capacity(train_config.iterations);

    for t in 0..train_config.iterations {
        if t > 0 && t % train_config.episode_length == 0 {
            obs = env.reset();
            scale = reward_scale(train_config, &env);
        }
        let epsilon = train_config.epsilon(t);
        let values = online.q_values(&obs)?;
        let action = select_action(&values, epsilon, &mut explore);
        let outcome = env.step(Action::try_from(action)?);
        buffer.push(Transition {
            observation: obs,
            action,
            reward: outcome.reward / scale,
            next_observation: outcome.observation,
            terminal: (t + 1) % train_config.episode_length == 0,
        });
        obs = outcome.observation;

        let loss = if buffer.len() >= train_config.batch_size {
            let batch = buffer.sample(train_config.batch_size, &mut replay);
            Some(train_step(&mut online, &target, &batch, train_config.gamma, &mut adam)?)
        } else {
            None
        };
        if (t + 1) % train_config.target_sync_interval == 0 {
            target.clone_from(&online);
        }
        records.push(MetricsRecord {
            iteration: t,
            instantaneous_reward_bps: outcome.reward,
            running_avg_throughput_bps: 0.0,
            epsilon,
            loss,
        });
    }
    Ok(TrainOutcome {
        metrics: MetricsLog::with_running_average(records, train_config.average_window),
        agent: online,
    })
}

fn reward_scale(config: &TrainConfig, env: &SpectrumEnv) -> f64 {
    config
        .reward_scale
        .unwrap_or_else(|| env.interference_free_rate().max(f64::MIN_POSITIVE))
}

/// Fixed policies used as baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptedPolicy {
    AlwaysIdle,
    AlwaysTransmit,
    UniformRandom,
}

impl ScriptedPolicy {
    pub const ALL: [ScriptedPolicy; 3] = [
        ScriptedPolicy::AlwaysIdle,
        ScriptedPolicy::AlwaysTransmit,
        ScriptedPolicy::UniformRandom,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ScriptedPolicy::AlwaysIdle => "always-idle",
            ScriptedPolicy::AlwaysTransmit => "always-transmit",
            ScriptedPolicy::UniformRandom => "uniform-random",
        }
    }
}

impl fmt::Display for ScriptedPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

/// Runs a fixed policy through the same episode structure and environment
/// stream as [`train_run`]. The uniform policy draws from the exploration
/// stream exactly like ε-greedy with ε = 1.
pub fn run_scripted(
    env_config: &NetworkConfig,
    policy: ScriptedPolicy,
    train_config: &TrainConfig,
    seed: u64,
) -> Result<MetricsLog> {
    train_config.validate()?;
    let (mut env, _) = init_env(env_config, seed)?;
    let mut explore = stream_rng(seed, Stream::Exploration);
    let mut records = Vec::with_capacity(train_config.iterations);
    for t in 0..train_config.iterations {
        if t > 0 && t % train_config.episode_length == 0 {
            env.reset();
        }
        let action = match policy {
            ScriptedPolicy::AlwaysIdle => Action::Idle,
            ScriptedPolicy::AlwaysTransmit => Action::Transmit,
            ScriptedPolicy::UniformRandom => Action::try_from(select_action(&[0.0; N_ACTIONS], 1.0, &mut explore))?,
        };
        let outcome = env.step(action);
        records.push(MetricsRecord {
            iteration: t,
            instantaneous_reward_bps: outcome.reward,
            running_avg_throughput_bps: 0.0,
            epsilon: if policy == ScriptedPolicy::UniformRandom { 1.0 } else { 0.0 },
            loss: None,
        });
    }
    Ok(MetricsLog::with_running_average(records, train_config.average_window))
}
