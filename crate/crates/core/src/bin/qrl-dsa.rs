use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrl_dsa::experiment::{iterations_to_fraction, load_config, run_alpha_sweep, run_convergence, ExperimentConfig};
use qrl_dsa::{selftest, Error};

/// QRL vs. DRL experiments on the D2D dynamic spectrum access simulator.
#[derive(Parser)]
#[command(name = "qrl-dsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train both agents on every seed and write convergence CSVs.
    Convergence(Overrides),
    /// Train both agents at every sweep alpha and write the summary CSV.
    SweepAlpha(Overrides),
    /// Load, validate and print the effective configuration.
    ValidateConfig(Overrides),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Parallel runs (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentConfig, Error> {
        let mut config = match &self.config {
            Some(path) => load_config(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seeds) = self.seeds {
            config.seeds = seeds;
        }
        if let Some(iterations) = self.iterations {
            config.train.iterations = iterations;
        }
        if let Some(dir) = self.out_dir {
            config.output_dir = dir;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(command: Command) -> Result<bool, Error> {
    match command {
        Command::Convergence(o) => {
            let report = run_convergence(&o.resolve()?)?;
            for curve in &report.curves {
                let hit = iterations_to_fraction(&curve.median, 0.9)
                    .map_or("never".to_string(), |i| i.to_string());
                println!(
                    "{}: final median {:.0} bit/s, 90% of final at iteration {hit}",
                    curve.agent,
                    curve.median.last().copied().unwrap_or(0.0)
                );
            }
            for file in report.files() {
                println!("wrote {}", file.display());
            }
        }
        Command::SweepAlpha(o) => {
            let report = run_alpha_sweep(&o.resolve()?)?;
            for row in &report.rows {
                println!(
                    "alpha {:.2} {}: median {:.0} (min {:.0}, max {:.0}) bit/s",
                    row.alpha, row.agent, row.median, row.min, row.max
                );
            }
            println!("wrote {}", report.summary_path.display());
        }
        Command::ValidateConfig(o) => {
            print!("{}", o.resolve()?.to_toml());
        }
        Command::Selftest => {
            let mut ok = true;
            for check in selftest::run()? {
                println!("[{}] {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
                ok &= check.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
