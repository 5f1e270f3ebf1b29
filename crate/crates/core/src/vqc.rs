//! Layered variational quantum circuit used as a Q-function approximator.
//!
//! Circuit layout for `n_blocks` blocks on `n_qubits` qubits:
//!
//! ```text
//! |0…0⟩ ─ [variational 0] ─ [entangling ring] ─ [encoding 0] ─ … ─ [encoding B-1] ─ [variational B] ─ ⟨Z_a⟩
//! ```
//!
//! A variational layer applies the configured rotation triplet (default
//! RZ·RY·RZ) to every qubit with free angles. The entangling ring applies a
//! CNOT (or CZ) from qubit `i` to `(i+1) mod n`. The encoding layer applies
//! `RX(λ_{b,q} · arctan(x_q))` to qubit `q`, so the observation is
//! re-uploaded once per block. Action values are `Q_a = w_a · ⟨Z_a⟩`.
//!
//! Parameters live in one flat vector:
//!
//! | range                              | meaning                            |
//! |------------------------------------|------------------------------------|
//! | `[0, 3n(B+1))`                     | variational angles, `(layer, qubit, rotation)` row-major |
//! | `[3n(B+1), 3n(B+1) + nB)`          | encoding scales, `(block, qubit)` row-major |
//! | last `n_actions` entries           | output scales                      |

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Axis, Gate, StateVector, MAX_QUBITS};
use crate::rng::{stream_rng, Stream};

/// Two-qubit gate used by the entangling ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    CnotRing,
    CzRing,
}

impl Entangler {
    pub fn as_str(&self) -> &'static str {
        match self {
            Entangler::CnotRing => "cnot_ring",
            Entangler::CzRing => "cz_ring",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqcConfig {
    pub n_qubits: usize,
    pub n_blocks: usize,
    pub entangler: Entangler,
    pub n_actions: usize,
    pub rotations: [Axis; 3],
}

impl Default for VqcConfig {
    fn default() -> Self {
        Self {
            n_qubits: 4,
            n_blocks: 5,
            entangler: Entangler::CnotRing,
            n_actions: 2,
            rotations: [Axis::Z, Axis::Y, Axis::Z],
        }
    }
}

impl VqcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::config(
                "vqc.n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {}", self.n_qubits),
            ));
        }
        if self.n_actions == 0 || self.n_actions > self.n_qubits {
            return Err(Error::config(
                "vqc.n_actions",
                format!(
                    "must be in 1..=n_qubits ({}), got {}",
                    self.n_qubits, self.n_actions
                ),
            ));
        }
        Ok(())
    }

    pub fn n_variational(&self) -> usize {
        3 * self.n_qubits * (self.n_blocks + 1)
    }

    pub fn n_encoding(&self) -> usize {
        self.n_qubits * self.n_blocks
    }

    /// `3·n·(B+1) + n·B + n_actions`.
    pub fn parameter_count(&self) -> usize {
        self.n_variational() + self.n_encoding() + self.n_actions
    }
}

/// Q-value estimates, one per action.
pub type ActionValues = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    /// Angle is `params[param]`.
    Variational { axis: Axis, qubit: usize, param: usize },
    /// Angle is `params[scale] · arctan(x_qubit)`.
    Encoding { qubit: usize, scale: usize },
    Fixed(Gate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcModel {
    config: VqcConfig,
    ops: Vec<Op>,
    params: Vec<f64>,
}

/// Builds the circuit for `config` with angles drawn uniformly from
/// `[-π, π]` and all encoding and output scales set to 1.
pub fn build_vqc(config: &VqcConfig, seed: u64) -> Result<VqcModel> {
    config.validate()?;
    let mut rng: ChaCha8Rng = stream_rng(seed, Stream::Init);
    let mut params = Vec::with_capacity(config.parameter_count());
    params.extend((0..config.n_variational()).map(|_| rng.gen_range(-PI..=PI)));
    params.extend(std::iter::repeat_n(1.0, config.n_encoding() + config.n_actions));
    VqcModel::from_parameters(config.clone(), params)
}

impl VqcModel {
    /// Assembles a model from an explicit flat parameter vector.
    pub fn from_parameters(config: VqcConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if params.len() != config.parameter_count() {
            return Err(Error::usage(format!(
                "expected {} parameters, got {}",
                config.parameter_count(),
                params.len()
            )));
        }
        let ops = compile(&config);
        Ok(Self {
            config,
            ops,
            params,
        })
    }

    pub fn config(&self) -> &VqcConfig {
        &self.config
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn variational_angles(&self) -> &[f64] {
        &self.params[..self.config.n_variational()]
    }

    pub fn encoding_scales(&self) -> &[f64] {
        let start = self.config.n_variational();
        &self.params[start..start + self.config.n_encoding()]
    }

    pub fn output_scales(&self) -> &[f64] {
        &self.params[self.params.len() - self.config.n_actions..]
    }

    /// The gate sequence for one observation, with every angle resolved.
    pub fn circuit(&self, observation: &[f64]) -> Result<Vec<Gate>> {
        let encoded = self.encode(observation)?;
        Ok((0..self.ops.len()).map(|k| self.gate(k, &encoded, 0.0)).collect())
    }

    /// `Q_a = w_a · ⟨Z_a⟩` for `a` in `0..n_actions`.
    pub fn forward(&self, observation: &[f64]) -> Result<ActionValues> {
        let encoded = self.encode(observation)?;
        let state = self.run(&encoded);
        Ok(self.readout(&state))
    }

    /// Gradient of `Σ_a loss_grad[a] · Q_a` with respect to every parameter,
    /// each rotation derivative taken by the two-term parameter-shift rule
    /// `∂⟨Z⟩/∂θ = (⟨Z⟩(θ + π/2) − ⟨Z⟩(θ − π/2)) / 2`.
    pub fn gradient(&self, observation: &[f64], loss_grad: &[f64]) -> Result<Vec<f64>> {
        self.check_loss_grad(loss_grad)?;
        let encoded = self.encode(observation)?;
        let n_actions = self.config.n_actions;
        let outputs = self.output_scales().to_vec();
        let mut grad = vec![0.0; self.params.len()];

        // Prefix state after ops[..k]; each shifted evaluation resumes from it.
        let mut prefix = StateVector::new(self.config.n_qubits)?;
        for k in 0..self.ops.len() {
            let (param, chain) = match self.ops[k] {
                Op::Variational { param, .. } => (param, 1.0),
                Op::Encoding { qubit, scale } => (scale, encoded[qubit]),
                Op::Fixed(_) => {
                    prefix.apply_unchecked(&self.gate(k, &encoded, 0.0));
                    continue;
                }
            };
            let plus = self.expectations_from(&prefix, k, &encoded, FRAC_PI_2);
            let minus = self.expectations_from(&prefix, k, &encoded, -FRAC_PI_2);
            let mut d = 0.0;
            for a in 0..n_actions {
                d += loss_grad[a] * outputs[a] * (plus[a] - minus[a]) / 2.0;
            }
            grad[param] += chain * d;
            prefix.apply_unchecked(&self.gate(k, &encoded, 0.0));
        }

        let expectations = self.expectations(&prefix);
        let out_start = self.params.len() - n_actions;
        for a in 0..n_actions {
            grad[out_start + a] = loss_grad[a] * expectations[a];
        }
        Ok(grad)
    }

    /// Same quantity as [`VqcModel::gradient`], computed by reverse-mode
    /// (adjoint) differentiation: one forward pass and one backward sweep
    /// instead of two circuit evaluations per rotation.
    pub fn gradient_adjoint(&self, observation: &[f64], loss_grad: &[f64]) -> Result<Vec<f64>> {
        self.check_loss_grad(loss_grad)?;
        let (_, grad) = self.value_and_gradient(observation, |_| loss_grad.to_vec())?;
        Ok(grad)
    }

    /// Runs the circuit once, lets `loss_grad` map the action values to
    /// `∂L/∂Q`, and returns the action values together with the adjoint
    /// gradient of `L`.
    pub fn value_and_gradient(
        &self,
        observation: &[f64],
        loss_grad: impl FnOnce(&[f64]) -> Vec<f64>,
    ) -> Result<(ActionValues, Vec<f64>)> {
        let encoded = self.encode(observation)?;
        let n_actions = self.config.n_actions;
        let outputs = self.output_scales();
        let mut grad = vec![0.0; self.params.len()];

        let mut psi = self.run(&encoded);
        let expectations = self.expectations(&psi);
        let values: ActionValues = expectations.iter().zip(outputs).map(|(z, w)| w * z).collect();
        let loss_grad = loss_grad(&values);
        self.check_loss_grad(&loss_grad)?;
        let out_start = self.params.len() - n_actions;
        for a in 0..n_actions {
            grad[out_start + a] = loss_grad[a] * expectations[a];
        }

        // Observable M = Σ_a g_a w_a Z_a is diagonal in the computational basis.
        let weights: Vec<f64> = (0..psi.amplitudes().len())
            .map(|index| {
                (0..n_actions)
                    .map(|a| {
                        let sign = if index >> a & 1 == 0 { 1.0 } else { -1.0 };
                        sign * loss_grad[a] * outputs[a]
                    })
                    .sum()
            })
            .collect();
        let mut lambda = psi.clone();
        lambda.scale_diagonal(&weights);

        // For R(θ) = exp(-iθA/2) at position k, ∂⟨M⟩/∂θ = Im⟨λ_k|A|ψ_k⟩ with
        // both vectors taken just after gate k.
        let mut scratch = psi.clone();
        for k in (0..self.ops.len()).rev() {
            let gate = self.gate(k, &encoded, 0.0);
            let target = match self.ops[k] {
                Op::Variational { axis, qubit, param } => Some((axis, qubit, param, 1.0)),
                Op::Encoding { qubit, scale } => Some((Axis::X, qubit, scale, encoded[qubit])),
                Op::Fixed(_) => None,
            };
            if let Some((axis, qubit, param, chain)) = target {
                scratch.clone_from(&psi);
                scratch.apply_pauli(axis, qubit);
                grad[param] += chain * lambda.inner(&scratch).im;
            }
            let inverse = gate.inverse();
            psi.apply_unchecked(&inverse);
            lambda.apply_unchecked(&inverse);
        }
        Ok((values, grad))
    }

    fn check_loss_grad(&self, loss_grad: &[f64]) -> Result<()> {
        if loss_grad.len() != self.config.n_actions {
            return Err(Error::usage(format!(
                "loss gradient has {} entries, model has {} actions",
                loss_grad.len(),
                self.config.n_actions
            )));
        }
        Ok(())
    }

    /// `arctan` of each feature after validating length and finiteness.
    fn encode(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.config.n_qubits {
            return Err(Error::usage(format!(
                "observation has {} features, circuit has {} qubits",
                observation.len(),
                self.config.n_qubits
            )));
        }
        observation
            .iter()
            .map(|&x| {
                if x.is_finite() {
                    Ok(x.atan())
                } else {
                    Err(Error::usage(format!("non-finite feature {x}")))
                }
            })
            .collect()
    }

    fn gate(&self, k: usize, encoded: &[f64], shift: f64) -> Gate {
        match self.ops[k] {
            Op::Variational { axis, qubit, param } => {
                Gate::rotation(axis, qubit, self.params[param] + shift)
            }
            Op::Encoding { qubit, scale } => Gate::Rx {
                target: qubit,
                angle: self.params[scale] * encoded[qubit] + shift,
            },
            Op::Fixed(gate) => gate,
        }
    }

    fn run(&self, encoded: &[f64]) -> StateVector {
        let mut state = StateVector::new(self.config.n_qubits).expect("validated qubit count");
        for k in 0..self.ops.len() {
            state.apply_unchecked(&self.gate(k, encoded, 0.0));
        }
        state
    }

    /// `⟨Z_a⟩` after running ops `k..` from `prefix` with op `k` shifted.
    fn expectations_from(&self, prefix: &StateVector, k: usize, encoded: &[f64], shift: f64) -> Vec<f64> {
        let mut state = prefix.clone();
        state.apply_unchecked(&self.gate(k, encoded, shift));
        for j in k + 1..self.ops.len() {
            state.apply_unchecked(&self.gate(j, encoded, 0.0));
        }
        self.expectations(&state)
    }

    fn expectations(&self, state: &StateVector) -> Vec<f64> {
        (0..self.config.n_actions)
            .map(|a| state.expectation_z_unchecked(a))
            .collect()
    }

    fn readout(&self, state: &StateVector) -> ActionValues {
        self.expectations(state)
            .into_iter()
            .zip(self.output_scales())
            .map(|(z, w)| w * z)
            .collect()
    }
}

fn compile(config: &VqcConfig) -> Vec<Op> {
    let n = config.n_qubits;
    let encoding_offset = config.n_variational();
    let mut ops = Vec::new();
    let variational = |ops: &mut Vec<Op>, layer: usize| {
        for qubit in 0..n {
            for (r, &axis) in config.rotations.iter().enumerate() {
                ops.push(Op::Variational {
                    axis,
                    qubit,
                    param: (layer * n + qubit) * 3 + r,
                });
            }
        }
    };
    for block in 0..config.n_blocks {
        variational(&mut ops, block);
        if n > 1 {
            for control in 0..n {
                let target = (control + 1) % n;
                ops.push(Op::Fixed(match config.entangler {
                    Entangler::CnotRing => Gate::Cnot { control, target },
                    Entangler::CzRing => Gate::Cz { control, target },
                }));
            }
        }
        for qubit in 0..n {
            ops.push(Op::Encoding {
                qubit,
                scale: encoding_offset + block * n + qubit,
            });
        }
    }
    variational(&mut ops, config.n_blocks);
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_ry(theta: f64) -> VqcModel {
        let config = VqcConfig {
            n_qubits: 1,
            n_blocks: 0,
            n_actions: 1,
            ..VqcConfig::default()
        };
        // RZ(0) · RY(θ) · RZ(0), output scale 1
        VqcModel::from_parameters(config, vec![0.0, theta, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn default_circuit_has_94_parameters() {
        let model = build_vqc(&VqcConfig::default(), 7).unwrap();
        assert_eq!(model.parameter_count(), 94);
        assert_eq!(model.variational_angles().len(), 72);
        assert_eq!(model.encoding_scales().len(), 20);
        assert_eq!(model.output_scales().len(), 2);
    }

    #[test]
    fn minimal_configuration_has_4_parameters() {
        let config = VqcConfig {
            n_qubits: 1,
            n_blocks: 0,
            n_actions: 1,
            ..VqcConfig::default()
        };
        assert_eq!(build_vqc(&config, 0).unwrap().parameter_count(), 4);
    }

    #[test]
    fn initialization_is_seeded() {
        let a = build_vqc(&VqcConfig::default(), 11).unwrap();
        let b = build_vqc(&VqcConfig::default(), 11).unwrap();
        let c = build_vqc(&VqcConfig::default(), 12).unwrap();
        assert_eq!(a.parameters(), b.parameters());
        assert_ne!(a.parameters(), c.parameters());
        assert!(a.variational_angles().iter().all(|p| (-PI..=PI).contains(p)));
        assert!(a.encoding_scales().iter().all(|&p| p == 1.0));
        assert!(a.output_scales().iter().all(|&p| p == 1.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let too_many_actions = VqcConfig {
            n_actions: 5,
            ..VqcConfig::default()
        };
        match build_vqc(&too_many_actions, 0) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "vqc.n_actions"),
            other => panic!("unexpected {other:?}"),
        }
        let no_qubits = VqcConfig {
            n_qubits: 0,
            ..VqcConfig::default()
        };
        assert!(build_vqc(&no_qubits, 0).unwrap_err().is_config());
    }

    #[test]
    fn identity_circuit_reads_output_scales() {
        let config = VqcConfig::default();
        let mut params = vec![0.0; config.parameter_count()];
        let n = params.len();
        params[n - 2] = 0.75;
        params[n - 1] = -2.0;
        let model = VqcModel::from_parameters(config, params).unwrap();
        let q = model.forward(&[0.0; 4]).unwrap();
        assert_abs_diff_eq!(q[0], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(q[1], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn forward_validates_observation() {
        let model = build_vqc(&VqcConfig::default(), 0).unwrap();
        assert!(matches!(model.forward(&[0.0; 3]), Err(Error::Usage(_))));
        assert!(matches!(model.forward(&[0.0, f64::NAN, 0.0, 0.0]), Err(Error::Usage(_))));
        assert!(matches!(model.gradient(&[0.0; 4], &[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn single_qubit_ry_gradient() {
        let g0 = single_ry(0.0).gradient(&[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(g0[1], 0.0, epsilon = 1e-15);
        let g1 = single_ry(FRAC_PI_2).gradient(&[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(g1[1], -1.0, epsilon = 1e-15);
        // ∂Q/∂w = ⟨Z⟩ = cos θ
        assert_abs_diff_eq!(g1[3], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g0[3], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn adjoint_matches_parameter_shift() {
        for seed in 0..5 {
            for entangler in [Entangler::CnotRing, Entangler::CzRing] {
                let config = VqcConfig {
                    entangler,
                    ..VqcConfig::default()
                };
                let mut model = build_vqc(&config, seed).unwrap();
                for (i, p) in model.parameters_mut().iter_mut().enumerate().skip(72) {
                    *p = 0.5 + 0.1 * i as f64;
                }
                let obs = [0.3, -0.8, 1.0, -0.1];
                let g = [0.7, -1.3];
                let shift = model.gradient(&obs, &g).unwrap();
                let adjoint = model.gradient_adjoint(&obs, &g).unwrap();
                for (a, b) in shift.iter().zip(&adjoint) {
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn circuit_gate_count() {
        let model = build_vqc(&VqcConfig::default(), 0).unwrap();
        // 6 variational layers × 12 rotations, 5 rings × 4 CNOTs, 5 × 4 encodings
        assert_eq!(model.circuit(&[0.0; 4]).unwrap().len(), 72 + 20 + 20);
    }
}
