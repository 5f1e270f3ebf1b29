//! Quantum reinforcement learning for D2D dynamic spectrum access.
//!
//! The crate pairs a small dense statevector simulator and a layered
//! variational quantum circuit (VQC) Q-function with a classical multilayer
//! perceptron baseline, and trains both with one shared DQN loop on a
//! slot-based D2D spectrum-sharing simulator.
//!
//! | module        | contents                                                   |
//! |---------------|------------------------------------------------------------|
//! | [`quantum`]   | statevector, gates, probabilities, `⟨Z⟩`, Bell state        |
//! | [`vqc`]       | re-uploading circuit, parameter-shift and adjoint gradients |
//! | [`nn`]        | dense ReLU network, backpropagation, Adam                  |
//! | [`env`]       | D2D network simulator, path loss, Shannon rate             |
//! | [`rl`]        | replay buffer, ε-greedy, TD targets, training loop         |
//! | [`experiment`]| config files, convergence runs, α-sweeps, CSV output        |
//! | [`checkpoint`]| text checkpoint format shared by both models               |
//! | [`selftest`]  | quick invariant suite behind the `selftest` subcommand     |
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod checkpoint;
pub mod env;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod quantum;
pub mod rl;
pub mod rng;
pub mod selftest;
pub mod vqc;

pub use error::{Error, Result};

/// Crate version, stamped into every results file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
