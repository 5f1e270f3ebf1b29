//! Experiment harness: configuration files, seeded convergence runs,
//! α-sweeps and CSV output.
//!
//! Configuration is TOML. Every key is optional; absent keys take the
//! defaults below and unknown keys are rejected.
//!
//! ```toml
//! seeds = [0, 1, 2, 3, 4]
//! output_dir = "results"
//! workers = 0                  # 0 = one worker per core
//!
//! [network]                    # NetworkConfig
//! alpha = 0.7
//! beta = 0.5
//! d2d_bs_distance_range = [100.0, 1000.0]
//! d2d_pair_distance_range = [20.0, 100.0]
//! bs_power_dbm = 40.0
//! d2d_power_dbm = 23.0
//! noise_dbm = -114.0
//! carrier_hz = 2e9
//! bandwidth_hz = 20e6
//! los_decay_m = 150.0
//! pl_exponent_los = 2.0
//! pl_exponent_nlos = 3.5
//! collision_reward = 0.0
//!
//! [train]                      # TrainConfig
//! iterations = 50000
//! gamma = 0.9
//! epsilon_start = 1.0
//! epsilon_end = 0.05
//! epsilon_decay_steps = 5000
//! batch_size = 32
//! buffer_capacity = 10000
//! target_sync_interval = 100
//! learning_rate_mlp = 1e-3
//! learning_rate_vqc = 1e-2
//! # reward_scale = 1e8         # default: per-episode interference-free rate
//! episode_length = 200
//! average_window = 1000
//! vqc_gradient = "adjoint"     # or "parameter-shift"
//!
//! [vqc]                        # VqcConfig
//! n_qubits = 4
//! n_blocks = 5
//! entangler = "cnot_ring"      # or "cz_ring"
//! n_actions = 2
//! rotations = ["z", "y", "z"]
//!
//! [mlp]
//! layer_sizes = [4, 64, 64, 2]
//!
//! [sweep]
//! alphas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::NetworkConfig;
use crate::error::{Error, Result};
use crate::rl::{run_scripted, train_run, AgentKind, MetricsLog, ScriptedPolicy, TrainConfig};
use crate::vqc::VqcConfig;
use crate::VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub layer_sizes: Vec<usize>,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![4, 64, 64, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alphas: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Parallel runs; 0 means one per available core.
    pub workers: usize,
    pub network: NetworkConfig,
    pub train: TrainConfig,
    pub vqc: VqcConfig,
    pub mlp: MlpConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seeds: vec![0, 1, 2, 3, 4],
            output_dir: PathBuf::from("results"),
            workers: 0,
            network: NetworkConfig::default(),
            train: TrainConfig::default(),
            vqc: VqcConfig::default(),
            mlp: MlpConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        // TOML integers are signed 64-bit; larger seeds could not be read
        // back from a provenance header.
        if let Some(s) = self.seeds.iter().find(|&&s| s > i64::MAX as u64) {
            return Err(Error::config("seeds", format!("seed {s} exceeds {}", i64::MAX)));
        }
        if let Some(a) = self.sweep.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::config("sweep.alphas", format!("values must be in [0, 1], got {a}")));
        }
        self.network.validate()?;
        self.train.validate()?;
        for kind in self.agents() {
            crate::rl::Agent::build(&kind, 0, self.train.vqc_gradient)?;
        }
        Ok(())
    }

    /// The quantum agent first, then the classical one.
    pub fn agents(&self) -> [AgentKind; 2] {
        [
            AgentKind::Vqc(self.vqc.clone()),
            AgentKind::Mlp {
                layer_sizes: self.mlp.layer_sizes.clone(),
            },
        ]
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Parses TOML text, filling defaults and naming the offending key on
    /// error.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<syntax>", e.to_string().trim_end().to_string()))?;
        let config: Self = serde_path_to_error::deserialize(table).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "<root>".to_string() } else { path };
            Error::config(key, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    fn provenance(&self, lines: &[String]) -> Vec<String> {
        let mut header = vec![format!("qrl-dsa {VERSION}")];
        header.extend(lines.iter().cloned());
        header.push("config:".to_string());
        header.extend(self.to_toml().lines().map(|l| format!("  {l}")));
        header
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))
    }
}

/// Loads and validates a TOML experiment configuration.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config file: {e}")))?;
    ExperimentConfig::from_toml(&text)
}

/// Trailing mean: element `i` averages `series[max(0, i-window+1)..=i]`.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::usage("moving-average window must be at least 1"));
    }
    Ok((0..series.len())
        .map(|i| {
            let start = (i + 1).saturating_sub(window);
            let slice = &series[start..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect())
}

/// Median of a nonempty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// First index from which `curve` stays at or above `fraction` of its final
/// value. Early excursions above the target that the curve later falls back
/// from do not count, since a running average over a handful of samples is
/// mostly noise.
pub fn iterations_to_fraction(curve: &[f64], fraction: f64) -> Option<usize> {
    let target = fraction * curve.last()?;
    let start = curve.iter().rposition(|&v| v < target).map_or(0, |i| i + 1);
    (start < curve.len()).then_some(start)
}

/// One training run inside an experiment.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub agent: &'static str,
    pub seed: u64,
    pub metrics: MetricsLog,
    pub path: PathBuf,
}

/// Per-iteration curves across seeds for one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCurve {
    pub agent: &'static str,
    pub median: Vec<f64>,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub runs: Vec<RunRecord>,
    /// QRL first, then DRL.
    pub curves: Vec<SummaryCurve>,
    pub summary_path: PathBuf,
}

impl ConvergenceReport {
    pub fn curve(&self, agent: &str) -> Option<&SummaryCurve> {
        self.curves.iter().find(|c| c.agent == agent)
    }

    pub fn files(&self) -> Vec<PathBuf> {
        let mut files: Vec<PathBuf> = self.runs.iter().map(|r| r.path.clone()).collect();
        files.push(self.summary_path.clone());
        files
    }
}

/// Column names of the convergence summary CSV.
pub const CONVERGENCE_SUMMARY_COLUMNS: [&str; 5] = [
    "iteration",
    "qrl_median_running_avg_bps",
    "drl_median_running_avg_bps",
    "qrl_mean_running_avg_bps",
    "drl_mean_running_avg_bps",
];

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn summarize(agent: &'static str, logs: &[&MetricsLog]) -> SummaryCurve {
    let len = logs.iter().map(|l| l.len()).min().unwrap_or(0);
    let mut median_curve = Vec::with_capacity(len);
    let mut mean_curve = Vec::with_capacity(len);
    for i in 0..len {
        let column: Vec<f64> = logs.iter().map(|l| l.records[i].running_avg_throughput_bps).collect();
        median_curve.push(median(&column));
        mean_curve.push(column.iter().sum::<f64>() / column.len() as f64);
    }
    SummaryCurve {
        agent,
        median: median_curve,
        mean: mean_curve,
    }
}

fn write_table(path: &Path, header: &[String], columns: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    for line in header {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    let mut writer = csv::Writer::from_writer(out.into_bytes());
    writer.write_record(columns).map_err(csv_err)?;
    for row in rows {
        writer.write_record(row).map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Trains both agents on every seed and writes
/// `<output_dir>/convergence/{qrl,drl}_seed<N>.csv` plus `summary.csv`.
pub fn run_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let dir = config.output_dir.join("convergence");
    create_dir(&dir)?;
    let agents = config.agents();
    let jobs: Vec<(usize, u64)> = config
        .seeds
        .iter()
        .flat_map(|&seed| (0..agents.len()).map(move |a| (a, seed)))
        .collect();

    let runs: Vec<RunRecord> = config.pool()?.install(|| {
        jobs.par_iter()
            .map(|&(a, seed)| {
                let kind = &agents[a];
                let metrics = train_run(&config.network, kind, &config.train, seed)?;
                let path = dir.join(format!("{}_seed{seed}.csv", kind.label()));
                let header = config.provenance(&[
                    "experiment: convergence".to_string(),
                    format!("agent: {}", kind.label()),
                    format!("seed: {seed}"),
                ]);
                metrics.write_csv(&path, &header)?;
                Ok(RunRecord {
                    agent: kind.label(),
                    seed,
                    metrics,
                    path,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let curves: Vec<SummaryCurve> = agents
        .iter()
        .map(|kind| {
            let logs: Vec<&MetricsLog> = runs
                .iter()
                .filter(|r| r.agent == kind.label())
                .map(|r| &r.metrics)
                .collect();
            summarize(kind.label(), &logs)
        })
        .collect();

    let summary_path = dir.join("summary.csv");
    let seeds: Vec<String> = config.seeds.iter().map(u64::to_string).collect();
    let header = config.provenance(&[
        "experiment: convergence summary".to_string(),
        format!("seeds: {}", seeds.join(",")),
        format!("running-average window: {}", config.train.average_window),
    ]);
    let len = curves.iter().map(|c| c.median.len()).min().unwrap_or(0);
    let rows = (0..len)
        .map(|i| {
            vec![
                i.to_string(),
                curves[0].median[i].to_string(),
                curves[1].median[i].to_string(),
                curves[0].mean[i].to_string(),
                curves[1].mean[i].to_string(),
            ]
        })
        .collect();
    write_table(&summary_path, &header, &CONVERGENCE_SUMMARY_COLUMNS, rows)?;

    Ok(ConvergenceReport {
        runs,
        curves,
        summary_path,
    })
}

/// Final running-average throughput of one (alpha, agent, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    pub agent: &'static str,
    pub seed: u64,
    pub final_throughput_bps: f64,
}

/// Across-seed statistics for one (alpha, agent) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub agent: &'static str,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    pub rows: Vec<SweepRow>,
    pub summary_path: PathBuf,
}

impl SweepReport {
    pub fn row(&self, alpha: f64, agent: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.alpha == alpha && r.agent == agent)
    }

    pub fn points_for(&self, alpha: f64, agent: &str) -> Vec<&SweepPoint> {
        self.points
            .iter()
            .filter(|p| p.alpha == alpha && p.agent == agent)
            .collect()
    }
}

pub const SWEEP_SUMMARY_COLUMNS: [&str; 5] = ["alpha", "agent", "median", "min", "max"];

/// Trains both agents for every `(alpha, seed)` with the configured budget
/// and writes `<output_dir>/sweep_alpha/summary.csv`.
pub fn run_alpha_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    config.validate()?;
    if config.sweep.alphas.is_empty() {
        return Err(Error::config("sweep.alphas", "sweep list is empty"));
    }
    let dir = config.output_dir.join("sweep_alpha");
    create_dir(&dir)?;
    let agents = config.agents();
    let mut jobs = Vec::new();
    for &alpha in &config.sweep.alphas {
        for a in 0..agents.len() {
            for &seed in &config.seeds {
                jobs.push((alpha, a, seed));
            }
        }
    }

    let points: Vec<SweepPoint> = config.pool()?.install(|| {
        jobs.par_iter()
            .map(|&(alpha, a, seed)| {
                let network = NetworkConfig {
                    alpha,
                    ..config.network.clone()
                };
                let kind = &agents[a];
                let metrics = train_run(&network, kind, &config.train, seed)?;
                Ok(SweepPoint {
                    alpha,
                    agent: kind.label(),
                    seed,
                    final_throughput_bps: metrics.final_throughput(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows = Vec::new();
    for &alpha in &config.sweep.alphas {
        for kind in &agents {
            let values: Vec<f64> = points
                .iter()
                .filter(|p| p.alpha == alpha && p.agent == kind.label())
                .map(|p| p.final_throughput_bps)
                .collect();
            rows.push(SweepRow {
                alpha,
                agent: kind.label(),
                median: median(&values),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }

    let summary_path = dir.join("summary.csv");
    let seeds: Vec<String> = config.seeds.iter().map(u64::to_string).collect();
    let header = config.provenance(&[
        "experiment: alpha sweep".to_string(),
        format!("seeds: {}", seeds.join(",")),
        format!("iterations per run: {}", config.train.iterations),
    ]);
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.alpha.to_string(),
                r.agent.to_string(),
                r.median.to_string(),
                r.min.to_string(),
                r.max.to_string(),
            ]
        })
        .collect();
    write_table(&summary_path, &header, &SWEEP_SUMMARY_COLUMNS, table)?;

    Ok(SweepReport {
        points,
        rows,
        summary_path,
    })
}

/// Final running-average throughput of one scripted policy on one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePoint {
    pub policy: ScriptedPolicy,
    pub seed: u64,
    pub final_throughput_bps: f64,
}

/// Runs every scripted policy on every configured seed with the same
/// environment draws the trained agents see.
pub fn run_baselines(config: &ExperimentConfig) -> Result<Vec<BaselinePoint>> {
    config.validate()?;
    let mut points = Vec::new();
    for &seed in &config.seeds {
        for policy in ScriptedPolicy::ALL {
            let log = run_scripted(&config.network, policy, &config.train, seed)?;
            points.push(BaselinePoint {
                policy,
                seed,
                final_throughput_bps: log.final_throughput(),
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 2).unwrap(), vec![1.0, 1.5, 2.5]);
        let xs = [4.0, -1.0, 7.5];
        assert_eq!(moving_average(&xs, 1).unwrap(), xs.to_vec());
        for w in 1..6 {
            for v in moving_average(&[0.1; 10], w).unwrap() {
                assert_abs_diff_eq!(v, 0.1, epsilon = 1e-15);
            }
        }
        assert!(matches!(moving_average(&xs, 0), Err(Error::Usage(_))));
        assert!(moving_average(&[], 3).unwrap().is_empty());
    }

    #[test]
    fn median_and_fraction() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(iterations_to_fraction(&[0.0, 5.0, 9.0, 10.0], 0.9), Some(2));
        assert_eq!(iterations_to_fraction(&[], 0.9), None);
        assert_eq!(iterations_to_fraction(&[10.0, 2.0, 9.5, 8.0, 9.2, 10.0], 0.9), Some(4));
        assert_eq!(iterations_to_fraction(&[10.0, 10.0], 0.9), Some(0));
        assert_eq!(iterations_to_fraction(&[-1.0, -2.0], 0.9), None);
    }

    #[test]
    fn empty_config_gives_defaults() {
        let config = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(config, ExperimentConfig::default());
        assert_eq!(config.network.alpha, 0.7);
        assert_eq!(config.network.beta, 0.5);
        assert_eq!(config.vqc.n_qubits, 4);
        assert_eq!(config.vqc.n_blocks, 5);
        assert_eq!(config.mlp.layer_sizes, vec![4, 64, 64, 2]);
    }

    #[test]
    fn out_of_range_alpha_names_key() {
        let err = ExperimentConfig::from_toml("[network]\nalpha = 1.5\n").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "network.alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        let err = ExperimentConfig::from_toml("[network]\ngamma = 0.1\n").unwrap_err();
        assert!(err.is_config(), "{err}");
        assert!(err.to_string().contains("gamma"), "{err}");
        let err = ExperimentConfig::from_toml("[train]\nbatch_size = \"big\"\n").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "train.batch_size"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ExperimentConfig::from_toml("seeds = [").unwrap_err().is_config());
        assert!(ExperimentConfig::from_toml("seeds = []").unwrap_err().is_config());
        assert!(ExperimentConfig::from_toml("[sweep]\nalphas = [0.5, -0.1]").unwrap_err().is_config());
    }

    #[test]
    fn toml_round_trip() {
        let mut config = ExperimentConfig::default();
        config.train.reward_scale = Some(1.5e8);
        config.network.alpha = 0.35;
        config.seeds = vec![9, 4];
        let text = config.to_toml();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), config);
        let defaults = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&defaults.to_toml()).unwrap(), defaults);
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = load_config(Path::new("/definitely/not/here.toml")).unwrap_err();
        assert!(err.is_config());
    }
}
