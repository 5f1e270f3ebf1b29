//! Output-file contracts of the experiment runners and the training loop.

use std::fs;
use std::path::Path;

use qrl_dsa::experiment::{
    load_config, median, run_alpha_sweep, run_baselines, run_convergence, ExperimentConfig,
    CONVERGENCE_SUMMARY_COLUMNS, SWEEP_SUMMARY_COLUMNS,
};
use qrl_dsa::rl::{train_run, MetricsLog, ScriptedPolicy, METRICS_COLUMNS};
use qrl_dsa::Error;

fn small_config(dir: &Path, seeds: Vec<u64>, iterations: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig {
        seeds,
        output_dir: dir.to_path_buf(),
        workers: 1,
        ..ExperimentConfig::default()
    };
    config.train.iterations = iterations;
    config
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn empty_config_file_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    fs::write(&path, "").unwrap();
    let config = load_config(&path).unwrap();
    assert_eq!(config, ExperimentConfig::default());
    assert_eq!(config.network.alpha, 0.7);
    assert_eq!(config.network.beta, 0.5);
    assert_eq!(config.network.d2d_bs_distance_range, [100.0, 1000.0]);
    assert_eq!(config.network.d2d_pair_distance_range, [20.0, 100.0]);
    assert_eq!((config.network.bs_power_dbm, config.network.d2d_power_dbm), (40.0, 23.0));
    assert_eq!(config.network.noise_dbm, -114.0);
    assert_eq!((config.network.carrier_hz, config.network.bandwidth_hz), (2e9, 20e6));
    assert_eq!((config.vqc.n_qubits, config.vqc.n_blocks), (4, 5));
    assert_eq!(config.mlp.layer_sizes, vec![4, 64, 64, 2]);
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[network]\nalpha = 1.5\n", "network.alpha"),
        ("[network]\nbogus = 1\n", "network"),
        ("[train]\ngamma = \"high\"\n", "train.gamma"),
        ("seeds = []\n", "seeds"),
        ("[sweep]\nalphas = [0.5, -0.1]\n", "sweep.alphas"),
    ];
    for (text, key) in cases {
        let path = dir.path().join("bad.toml");
        fs::write(&path, text).unwrap();
        match load_config(&path) {
            Err(Error::Config { key: got, .. }) => assert!(got.starts_with(key), "{text:?}: key {got}"),
            other => panic!("{text:?}: unexpected {other:?}"),
        }
    }
    assert!(load_config(&dir.path().join("missing.toml")).unwrap_err().is_config());
}

#[test]
fn config_round_trips_through_toml() {
    let mut config = ExperimentConfig {
        seeds: vec![3, 1, 4],
        ..ExperimentConfig::default()
    };
    config.network.alpha = 0.25;
    config.train.reward_scale = Some(1e6);
    config.sweep.alphas = vec![0.0, 0.5, 1.0];
    let back = ExperimentConfig::from_toml(&config.to_toml()).unwrap();
    assert_eq!(back, config);
}

#[test]
fn convergence_file_count_contract() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_convergence(&small_config(dir.path(), vec![0], 10)).unwrap();
    let mut names: Vec<String> = fs::read_dir(dir.path().join("convergence"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["drl_seed0.csv", "qrl_seed0.csv", "summary.csv"]);
    assert_eq!(report.files().len(), 3);
    for agent in ["qrl", "drl"] {
        let lines = data_lines(&dir.path().join(format!("convergence/{agent}_seed0.csv")));
        assert_eq!(lines[0], METRICS_COLUMNS.join(","));
        assert_eq!(lines.len(), 11);
    }
    let summary = data_lines(&report.summary_path);
    assert_eq!(summary[0], CONVERGENCE_SUMMARY_COLUMNS.join(","));
    assert_eq!(summary.len(), 11);
}

#[test]
fn provenance_header_is_sufficient_to_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), vec![2], 20);
    config.network.alpha = 0.4;
    config.train.gamma = 0.8;
    let report = run_convergence(&config).unwrap();
    let text = fs::read_to_string(&report.runs[0].path).unwrap();
    let toml: String = text
        .lines()
        .skip_while(|l| *l != "# config:")
        .skip(1)
        .take_while(|l| l.starts_with("#   ") || *l == "#  ")
        .map(|l| format!("{}\n", l.strip_prefix("#   ").unwrap_or("")))
        .collect();
    let recovered = ExperimentConfig::from_toml(&toml).unwrap();
    assert_eq!(recovered, config);
    assert!(text.starts_with(&format!("# qrl-dsa {}", qrl_dsa::VERSION)));
}

#[test]
fn summary_is_recomputable_from_run_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_convergence(&small_config(dir.path(), vec![0, 1, 2], 300)).unwrap();
    for (label, column) in [("qrl", 1), ("drl", 2)] {
        let logs: Vec<MetricsLog> = (0..3)
            .map(|s| MetricsLog::read_csv(&dir.path().join(format!("convergence/{label}_seed{s}.csv"))).unwrap())
            .collect();
        let summary = data_lines(&report.summary_path);
        for (i, row) in summary[1..].iter().enumerate() {
            let recorded: f64 = row.split(',').nth(column).unwrap().parse().unwrap();
            let values: Vec<f64> = logs.iter().map(|l| l.records[i].running_avg_throughput_bps).collect();
            assert_eq!(recorded, median(&values), "{label} row {i}");
        }
        let curve = report.curve(label).unwrap();
        assert_eq!(curve.median.len(), 300);
    }
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut config = small_config(a.path(), vec![0, 1], 250);
    run_convergence(&config).unwrap();
    config.output_dir = b.path().to_path_buf();
    config.workers = 2;
    run_convergence(&config).unwrap();
    for name in ["qrl_seed0.csv", "qrl_seed1.csv", "drl_seed0.csv", "drl_seed1.csv", "summary.csv"] {
        let x = fs::read(a.path().join("convergence").join(name)).unwrap();
        let y = fs::read(b.path().join("convergence").join(name)).unwrap();
        // The output directory appears in the provenance header.
        let strip = |bytes: Vec<u8>| {
            String::from_utf8(bytes)
                .unwrap()
                .lines()
                .filter(|l| !l.contains("output_dir") && !l.contains("workers"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(x), strip(y), "{name}");
    }
}

#[test]
fn sweep_shape_contract() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), vec![0, 1, 2], 10);
    config.sweep.alphas = vec![0.1, 0.3, 0.5, 0.7, 0.9];
    let report = run_alpha_sweep(&config).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert_eq!(report.points.len(), 30);
    let lines = data_lines(&report.summary_path);
    assert_eq!(lines[0], SWEEP_SUMMARY_COLUMNS.join(","));
    assert_eq!(lines.len(), 11);
    for row in &report.rows {
        assert!(row.min <= row.median && row.median <= row.max);
        assert_eq!(report.points_for(row.alpha, row.agent).len(), 3);
    }
    config.sweep.alphas.clear();
    assert!(run_alpha_sweep(&config).unwrap_err().is_config());
}

#[test]
fn idle_band_makes_transmit_dominant() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = small_config(dir.path(), vec![0], 6000);
    config.sweep.alphas = vec![0.0];
    config.network.alpha = 0.0;
    let report = run_alpha_sweep(&config).unwrap();
    let baseline = run_baselines(&config)
        .unwrap()
        .into_iter()
        .find(|b| b.policy == ScriptedPolicy::AlwaysTransmit)
        .unwrap()
        .final_throughput_bps;
    for agent in ["qrl", "drl"] {
        let got = report.row(0.0, agent).unwrap().median;
        // Residual ε = 0.05 exploration idles about 2.5% of slots.
        assert!(got > 0.95 * baseline && got <= baseline, "{agent}: {got} vs {baseline}");
    }
}

#[test]
fn training_edge_cases() {
    let config = ExperimentConfig::default();
    let [vqc, mlp] = config.agents();
    let mut train = config.train.clone();
    train.iterations = 0;
    assert!(train_run(&config.network, &vqc, &train, 0).unwrap().is_empty());
    train.iterations = 120;
    let a = train_run(&config.network, &mlp, &train, 4).unwrap();
    let b = train_run(&config.network, &mlp, &train, 4).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 120);
    assert!(a.records[..31].iter().all(|r| r.loss.is_none()));
    assert!(a.records[31..].iter().all(|r| r.loss.is_some()));
}
