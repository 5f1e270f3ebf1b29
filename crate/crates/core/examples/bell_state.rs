//! Prepares a Bell pair and a small GHZ state on the statevector simulator.
//!
//! ```text
//! cargo run --example bell_state
//! ```

use qrl_dsa::quantum::{bell_state, Gate, StateVector};

fn main() -> qrl_dsa::Result<()> {
    let bell = bell_state();
    println!("Bell state (qubit 1 leftmost):");
    for (bits, p) in bell.probability_map() {
        println!("  |{bits}>  p = {p:.3}");
    }

    let mut ghz = StateVector::new(3)?;
    ghz.apply_all(&[
        Gate::H { target: 0 },
        Gate::Cnot { control: 0, target: 1 },
        Gate::Cnot { control: 1, target: 2 },
    ])?;
    println!("GHZ state:");
    for (bits, p) in ghz.probability_map().into_iter().filter(|(_, p)| *p > 1e-12) {
        println!("  |{bits}>  p = {p:.3}");
    }
    for q in 0..3 {
        println!("  <Z_{q}> = {:+.3}", ghz.expectation_z(q)?);
    }
    Ok(())
}
