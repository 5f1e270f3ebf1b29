//! Dense statevector simulation for small registers.
//!
//! Basis indices are little-endian: qubit 0 is the least-significant bit of
//! the index. Rotations follow `R_A(θ) = exp(-iθA/2)` for `A ∈ {X, Y, Z}`.
//! Expectations are exact; there is no shot sampling.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Rotation axis of a single-qubit Pauli rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A gate together with the qubits it acts on.
///
/// Rotation angles are in radians. Two-qubit gates carry both a control and
/// a target, which must differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    H { target: usize },
    Cnot { control: usize, target: usize },
    Cz { control: usize, target: usize },
}

impl Gate {
    pub fn rotation(axis: Axis, target: usize, angle: f64) -> Self {
        match axis {
            Axis::X => Gate::Rx { target, angle },
            Axis::Y => Gate::Ry { target, angle },
            Axis::Z => Gate::Rz { target, angle },
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::Rx { target, .. }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::H { target }
            | Gate::Cnot { target, .. }
            | Gate::Cz { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } | Gate::Cz { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// The inverse gate. Every supported gate other than a rotation is
    /// self-inverse.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::Rx { target, angle } => Gate::Rx { target, angle: -angle },
            Gate::Ry { target, angle } => Gate::Ry { target, angle: -angle },
            Gate::Rz { target, angle } => Gate::Rz { target, angle: -angle },
            other => other,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(Error::usage(format!(
                "target qubit {target} out of range for {n_qubits}-qubit register"
            )));
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(Error::usage(format!(
                    "control qubit {control} out of range for {n_qubits}-qubit register"
                )));
            }
            if control == target {
                return Err(Error::usage(format!(
                    "control and target coincide on qubit {target}"
                )));
            }
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(Error::usage(format!("non-finite rotation angle {angle}")));
            }
        }
        Ok(())
    }
}

/// The quantum register: `2^n_qubits` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros state `|0…0⟩`.
    pub fn new(n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::config(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {n_qubits}"),
            ));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Builds a state from raw amplitudes, rejecting arrays that are not a
    /// power of two in length or not normalized to within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::usage(format!(
                "amplitude array length {len} is not a power of two ≥ 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::usage(format!("{n_qubits} qubits exceeds the cap of {MAX_QUBITS}")));
        }
        let state = Self {
            n_qubits,
            amplitudes,
        };
        let drift = (state.norm_sqr() - 1.0).abs();
        if !(drift < 1e-10) {
            return Err(Error::usage(format!("amplitudes not normalized (|norm² - 1| = {drift:e})")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Applies every gate of `gates` in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for gate in gates {
            self.apply(gate)?;
        }
        Ok(())
    }

    /// Consuming variant of [`StateVector::apply`].
    pub fn with_gate(mut self, gate: &Gate) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    /// Gate application for callers that already validated the gate against
    /// this register (the circuit compiler does so once per circuit).
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate) {
        match *gate {
            Gate::Rx { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                self.rotate_x(target, c, s);
            }
            Gate::Ry { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                self.rotate_y(target, c, s);
            }
            Gate::Rz { target, angle } => {
                let (s, c) = (angle / 2.0).sin_cos();
                self.rotate_z(target, c, s);
            }
            Gate::H { target } => self.hadamard(target),
            Gate::Cnot { control, target } => self.cnot(control, target),
            Gate::Cz { control, target } => self.cz(control, target),
        }
    }

    /// Multiplies the state by the Pauli operator `axis` on `target`.
    pub(crate) fn apply_pauli(&mut self, axis: Axis, target: usize) {
        let i = Complex64::i();
        self.for_each_pair(target, |a0, a1| match axis {
            Axis::X => std::mem::swap(a0, a1),
            Axis::Y => {
                let (x0, x1) = (*a0, *a1);
                *a0 = -i * x1;
                *a1 = i * x0;
            }
            Axis::Z => *a1 = -*a1,
        });
    }

    /// `Σ_b conj(self_b) · other_b`.
    pub(crate) fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Multiplies amplitude `b` by the real diagonal weight `weights[b]`.
    pub(crate) fn scale_diagonal(&mut self, weights: &[f64]) {
        for (a, w) in self.amplitudes.iter_mut().zip(weights) {
            *a *= *w;
        }
    }

    #[inline]
    fn for_each_pair(&mut self, target: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = 1usize << target;
        for chunk in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = chunk.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    fn rotate_x(&mut self, target: usize, c: f64, s: f64) {
        // [[c, -is], [-is, c]]
        self.for_each_pair(target, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = Complex64::new(c * x0.re + s * x1.im, c * x0.im - s * x1.re);
            *a1 = Complex64::new(s * x0.im + c * x1.re, -s * x0.re + c * x1.im);
        });
    }

    fn rotate_y(&mut self, target: usize, c: f64, s: f64) {
        // [[c, -s], [s, c]]
        self.for_each_pair(target, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = x0 * c - x1 * s;
            *a1 = x0 * s + x1 * c;
        });
    }

    fn rotate_z(&mut self, target: usize, c: f64, s: f64) {
        // diag(e^{-iθ/2}, e^{iθ/2})
        let down = Complex64::new(c, -s);
        let up = Complex64::new(c, s);
        self.for_each_pair(target, |a0, a1| {
            *a0 *= down;
            *a1 *= up;
        });
    }

    fn hadamard(&mut self, target: usize) {
        self.for_each_pair(target, |a0, a1| {
            let (x0, x1) = (*a0, *a1);
            *a0 = (x0 + x1) * FRAC_1_SQRT_2;
            *a1 = (x0 - x1) * FRAC_1_SQRT_2;
        });
    }

    fn cnot(&mut self, control: usize, target: usize) {
        let (cbit, tbit) = (1usize << control, 1usize << target);
        for index in 0..self.amplitudes.len() {
            if index & cbit != 0 && index & tbit == 0 {
                self.amplitudes.swap(index, index | tbit);
            }
        }
    }

    fn cz(&mut self, control: usize, target: usize) {
        let mask = (1usize << control) | (1usize << target);
        for (index, a) in self.amplitudes.iter_mut().enumerate() {
            if index & mask == mask {
                *a = -*a;
            }
        }
    }

    /// Measurement probabilities indexed by basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Measurement probabilities keyed by bitstring (qubit `n-1` leftmost).
    pub fn probability_map(&self) -> BTreeMap<String, f64> {
        self.probabilities()
            .into_iter()
            .enumerate()
            .map(|(index, p)| (bitstring(index, self.n_qubits), p))
            .collect()
    }

    /// Exact `⟨Z⟩` of `qubit`.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::usage(format!(
                "qubit {qubit} out of range for {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(self.expectation_z_unchecked(qubit))
    }

    pub(crate) fn expectation_z_unchecked(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(index, a)| {
                let p = a.norm_sqr();
                if index & bit == 0 {
                    p
                } else {
                    -p
                }
            })
            .sum()
    }
}

/// Formats a basis index as a bitstring with qubit `n_qubits - 1` first.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`, prepared as H(0) then CNOT(0 → 1) on `|00⟩`.
pub fn bell_state() -> StateVector {
    let mut state = StateVector::new(2).expect("two qubits is within the cap");
    state.hadamard(0);
    state.cnot(0, 1);
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn assert_amplitudes(state: &StateVector, expected: &[Complex64], tol: f64) {
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e.re, epsilon = tol);
            assert_abs_diff_eq!(a.im, e.im, epsilon = tol);
        }
    }

    #[test]
    fn new_state_is_all_zeros_basis_state() {
        let one = StateVector::new(1).unwrap();
        assert_eq!(one.amplitudes(), &[ONE, ZERO]);
        let two = StateVector::new(2).unwrap();
        assert_eq!(two.amplitudes(), &[ONE, ZERO, ZERO, ZERO]);
        let four = StateVector::new(4).unwrap();
        assert_eq!(four.amplitudes().len(), 16);
        assert_eq!(four.norm_sqr(), 1.0);
    }

    #[test]
    fn new_state_rejects_out_of_range_sizes() {
        assert!(StateVector::new(0).unwrap_err().is_config());
        assert!(StateVector::new(MAX_QUBITS + 1).unwrap_err().is_config());
        assert!(StateVector::new(MAX_QUBITS).is_ok());
    }

    #[test]
    fn rx_zero_is_identity_and_rx_pi_flips() {
        let s = StateVector::new(1).unwrap().with_gate(&Gate::Rx { target: 0, angle: 0.0 }).unwrap();
        assert_amplitudes(&s, &[ONE, ZERO], 1e-15);

        let s = StateVector::new(1).unwrap().with_gate(&Gate::Rx { target: 0, angle: PI }).unwrap();
        assert_amplitudes(&s, &[ZERO, Complex64::new(0.0, -1.0)], 1e-15);
        assert_abs_diff_eq!(s.probabilities()[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.expectation_z(0).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn hadamard_gives_equal_superposition() {
        let s = StateVector::new(1).unwrap().with_gate(&Gate::H { target: 0 }).unwrap();
        let p = s.probability_map();
        assert_abs_diff_eq!(p["0"], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p["1"], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn expectation_of_ground_state_is_one() {
        let s = StateVector::new(3).unwrap();
        for q in 0..3 {
            assert_eq!(s.expectation_z(q).unwrap(), 1.0);
        }
        assert!(matches!(s.expectation_z(3), Err(Error::Usage(_))));
    }

    #[test]
    fn bell_state_amplitudes_and_correlations() {
        let bell = bell_state();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert_amplitudes(&bell, &[h, ZERO, ZERO, h], 1e-12);
        let p = bell.probability_map();
        assert_abs_diff_eq!(p["00"], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p["11"], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p["01"], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p["10"], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bell.expectation_z(0).unwrap(), 0.0, epsilon = 1e-12);

        // P(q1 = 0 | q0 = 0) = P(00) / (P(00) + P(10))
        let probs = bell.probabilities();
        let q0_zero = probs[0b00] + probs[0b10];
        assert_abs_diff_eq!(probs[0b00] / q0_zero, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn little_endian_ordering() {
        // X on qubit 0 of a 2-qubit register lands on index 1, bitstring "01".
        let s = StateVector::new(2).unwrap().with_gate(&Gate::Rx { target: 0, angle: PI }).unwrap();
        let p = s.probability_map();
        assert_abs_diff_eq!(p["01"], 1.0, epsilon = 1e-15);
        assert_eq!(bitstring(0b110, 3), "110");
    }

    #[test]
    fn invalid_gates_are_rejected() {
        let mut s = StateVector::new(2).unwrap();
        assert!(s.apply(&Gate::H { target: 2 }).is_err());
        assert!(s.apply(&Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(s.apply(&Gate::Cz { control: 5, target: 0 }).is_err());
        assert!(s.apply(&Gate::Ry { target: 0, angle: f64::NAN }).is_err());
        assert!(s.apply(&Gate::Rz { target: 0, angle: f64::INFINITY }).is_err());
        assert_eq!(s, StateVector::new(2).unwrap());
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![ONE, ZERO, ZERO]).is_err());
        assert!(StateVector::from_amplitudes(vec![ONE, ONE]).is_err());
        let s = StateVector::from_amplitudes(vec![ZERO, ONE]).unwrap();
        assert_eq!(s.n_qubits(), 1);
    }

    #[test]
    fn pauli_y_matches_its_matrix() {
        let mut s = StateVector::new(1).unwrap();
        s.apply_pauli(Axis::Y, 0);
        // Y|0⟩ = i|1⟩
        assert_amplitudes(&s, &[ZERO, Complex64::new(0.0, 1.0)], 1e-15);
    }
}
