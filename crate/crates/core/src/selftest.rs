//! Fast invariant checks behind the `selftest` subcommand.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{init_env, Action, NetworkConfig};
use crate::error::Result;
use crate::nn::{build_mlp, parameter_count};
use crate::quantum::{bell_state, Gate, StateVector};
use crate::vqc::{build_vqc, VqcConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// A random gate on an `n`-qubit register.
pub fn random_gate(rng: &mut impl Rng, n: usize) -> Gate {
    let target = rng.gen_range(0..n);
    let other = (target + rng.gen_range(1..n.max(2))) % n;
    let angle = rng.gen_range(-2.0 * PI..2.0 * PI);
    match rng.gen_range(0..6) {
        0 => Gate::Rx { target, angle },
        1 => Gate::Ry { target, angle },
        2 => Gate::Rz { target, angle },
        3 => Gate::H { target },
        4 if n > 1 => Gate::Cnot { control: other, target },
        5 if n > 1 => Gate::Cz { control: other, target },
        _ => Gate::H { target },
    }
}

/// Runs every check; a `false` in any [`Check::passed`] is a failure.
pub fn run() -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    let vqc = build_vqc(&VqcConfig::default(), 0)?.parameter_count();
    let mlp = build_mlp(&[4, 64, 64, 2], 0)?.parameter_count();
    checks.push(check(
        "parameter counts",
        vqc == 94 && mlp == 4610 && parameter_count(&[4, 64, 64, 2]) == 4610,
        format!("vqc {vqc}, mlp {mlp}"),
    ));

    let bell = bell_state();
    let amp = bell.amplitudes();
    let bell_err = [
        (amp[0].re - FRAC_1_SQRT_2).abs(),
        amp[1].norm(),
        amp[2].norm(),
        (amp[3].re - FRAC_1_SQRT_2).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    checks.push(check("bell state", bell_err < 1e-12, format!("max amplitude error {bell_err:e}")));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut state = StateVector::new(4)?;
    let mut drift: f64 = 0.0;
    for _ in 0..1000 {
        state.apply(&random_gate(&mut rng, 4))?;
        drift = drift.max((state.norm_sqr() - 1.0).abs());
    }
    checks.push(check("norm preservation", drift < 1e-10, format!("max drift {drift:e}")));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let before = state.clone();
        let gate = random_gate(&mut rng, 4);
        state.apply(&gate)?;
        state.apply(&gate.inverse())?;
        let err = before
            .amplitudes()
            .iter()
            .zip(state.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    checks.push(check("gate inverses", worst < 1e-12, format!("max deviation {worst:e}")));

    let mut worst: f64 = 0.0;
    for seed in 0..3 {
        let model = build_vqc(&VqcConfig::default(), seed)?;
        let obs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let shift = model.gradient(&obs, &g)?;
        let adjoint = model.gradient_adjoint(&obs, &g)?;
        let mut params = model.parameters().to_vec();
        for (i, ps) in shift.iter().enumerate() {
            let h = 1e-5;
            let orig = params[i];
            params[i] = orig + h;
            let plus = crate::vqc::VqcModel::from_parameters(model.config().clone(), params.clone())?.forward(&obs)?;
            params[i] = orig - h;
            let minus = crate::vqc::VqcModel::from_parameters(model.config().clone(), params.clone())?.forward(&obs)?;
            params[i] = orig;
            let fd: f64 = (0..2).map(|a| g[a] * (plus[a] - minus[a]) / (2.0 * h)).sum();
            worst = worst.max((ps - fd).abs()).max((ps - adjoint[i]).abs());
        }
    }
    checks.push(check("vqc gradients", worst < 1e-5, format!("max abs error {worst:e}")));

    let cfg = NetworkConfig::default();
    let (mut env, _) = init_env(&cfg, 7)?;
    let (mut active, mut protected, mut idle_nonzero) = (0usize, 0usize, 0usize);
    let slots = 100_000;
    for i in 0..slots {
        let action = if i % 2 == 0 { Action::Idle } else { Action::Transmit };
        let out = env.step(action);
        if !out.channel_idle {
            active += 1;
            if out.observation[2] > 0.0 {
                protected += 1;
            }
        }
        if action == Action::Idle && out.reward != 0.0 {
            idle_nonzero += 1;
        }
    }
    let access = active as f64 / slots as f64;
    let protect = protected as f64 / active.max(1) as f64;
    checks.push(check(
        "environment statistics",
        (access - cfg.alpha).abs() <= 0.01 && (protect - cfg.beta).abs() <= 0.01 && idle_nonzero == 0,
        format!("access {access:.4}, protection {protect:.4}, idle rewards {idle_nonzero}"),
    ));

    Ok(checks)
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        for c in super::run().unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
