//! Parses an experiment configuration from TOML, shows a rejected key and
//! prints the effective configuration with defaults filled in.

use qrl_dsa::experiment::ExperimentConfig;

fn main() {
    let text = r#"
seeds = [10, 11]

[network]
alpha = 0.4

[train]
iterations = 20000
vqc_gradient = "parameter-shift"
"#;
    match ExperimentConfig::from_toml(text) {
        Ok(config) => println!("effective configuration:\n{}", config.to_toml()),
        Err(e) => eprintln!("unexpected: {e}"),
    }

    for bad in ["[network]\nalpha = 1.5\n", "[vqc]\nn_qubit = 4\n"] {
        match ExperimentConfig::from_toml(bad) {
            Ok(_) => println!("accepted {bad:?}"),
            Err(e) => println!("rejected {bad:?}: {e}"),
        }
    }
}
