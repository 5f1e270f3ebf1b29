//! Builds the default 94-parameter circuit, evaluates Q-values for one
//! observation and compares the parameter-shift and adjoint gradients.

use qrl_dsa::vqc::{build_vqc, VqcConfig};

fn main() -> qrl_dsa::Result<()> {
    let config = VqcConfig::default();
    let model = build_vqc(&config, 7)?;
    println!(
        "{} qubits, {} blocks, {} parameters ({} variational, {} encoding, {} output)",
        config.n_qubits,
        config.n_blocks,
        model.parameter_count(),
        config.n_variational(),
        config.n_encoding(),
        config.n_actions
    );
    println!("{} gates per forward pass", model.circuit(&[0.0; 4])?.len());

    let observation = [1.0, -1.0, 1.0, 0.25];
    let q = model.forward(&observation)?;
    println!("Q(idle) = {:+.5}, Q(transmit) = {:+.5}", q[0], q[1]);

    // Gradient of Q(transmit) alone.
    let g = [0.0, 1.0];
    let shift = model.gradient(&observation, &g)?;
    let adjoint = model.gradient_adjoint(&observation, &g)?;
    let worst = shift
        .iter()
        .zip(&adjoint)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("first five parameter-shift entries: {:+.5?}", &shift[..5]);
    println!("max |shift - adjoint| = {worst:.2e}");
    Ok(())
}
