//! Fits the 4610-parameter classical network to a toy regression target
//! with Adam, showing the forward/backward/step cycle used by the DQN loop.

use qrl_dsa::nn::{build_mlp, AdamConfig, AdamState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn target(x: &[f64]) -> [f64; 2] {
    [x[0] * x[1], x[2] - 0.5 * x[3]]
}

fn main() -> qrl_dsa::Result<()> {
    let mut model = build_mlp(&[4, 64, 64, 2], 0)?;
    println!("parameters: {}", model.parameter_count());
    let mut adam = AdamState::new(model.parameter_count(), AdamConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    for epoch in 0..=2000 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = target(&x);
        let mut loss = 0.0;
        let (_, grad) = model.value_and_gradient(&x, |out| {
            loss = out.iter().zip(y).map(|(o, t)| 0.5 * (o - t).powi(2)).sum();
            out.iter().zip(y).map(|(o, t)| o - t).collect()
        })?;
        adam.step(model.parameters_mut(), &grad)?;
        if epoch % 400 == 0 {
            println!("step {epoch:>4}: sample loss {loss:.5}");
        }
    }

    let probe = [0.5, -0.5, 0.2, 0.4];
    println!("prediction {:+.3?} vs target {:+.3?}", model.forward(&probe)?, target(&probe));
    Ok(())
}
