//! Classical simulation of reversible circuits on computational basis states.
//!
//! Every gate in the IR is a classical reversible operation, so a basis
//! state stays a basis state and a bit vector is a complete description.
//! `simulate` is a pure function: the same circuit can be simulated
//! concurrently on many states, which the exhaustive verifiers exploit.

use crate::ir::{Circuit, Gate, Qubit, Register};

/// A computational basis state: one classical bit per qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisState {
    bits: Vec<bool>,
}

impl BasisState {
    /// The all-zero state on `n` qubits.
    pub fn zero(n: usize) -> Self {
        BasisState {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        BasisState {
            bits: bits.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, q: Qubit) -> bool {
        self.bits[q.index()]
    }

    pub fn set(&mut self, q: Qubit, value: bool) {
        self.bits[q.index()] = value;
    }
}

/// Apply `circuit` to `state`, returning the output state.
///
/// Gate semantics: X flips its target; CNOT flips the target iff the control
/// is 1; Toffoli flips the target iff both controls are 1; Fredkin swaps its
/// two targets iff the control is 1.
///
/// Panics if the state length does not match the circuit's qubit count.
pub fn simulate(circuit: &Circuit, state: &BasisState) -> BasisState {
    let mut out = state.clone();
    simulate_in_place(circuit, &mut out);
    out
}

/// In-place variant of [`simulate`] for hot verification loops.
pub fn simulate_in_place(circuit: &Circuit, state: &mut BasisState) {
    assert_eq!(
        state.len(),
        circuit.qubit_count(),
        "state length must match circuit qubit count"
    );
    let bits = &mut state.bits;
    for gate in circuit.gates() {
        match *gate {
            Gate::X { target } => bits[target.index()] ^= true,
            Gate::Cnot { control, target } => {
                if bits[control.index()] {
                    bits[target.index()] ^= true;
                }
            }
            Gate::Toffoli { controls, target } => {
                if bits[controls[0].index()] && bits[controls[1].index()] {
                    bits[target.index()] ^= true;
                }
            }
            Gate::Fredkin { control, targets } => {
                if bits[control.index()] {
                    bits.swap(targets[0].index(), targets[1].index());
                }
            }
        }
    }
}

/// Little-endian read of a register from a state: bit 0 of the result is the
/// register's qubit 0.
///
/// Panics if the register is wider than 64 bits.
pub fn read_register(state: &BasisState, register: &Register) -> u64 {
    assert!(register.width() <= 64, "register too wide for a u64 read");
    let mut value = 0u64;
    for (i, &q) in register.qubits().iter().enumerate() {
        if state.get(q) {
            value |= 1 << i;
        }
    }
    value
}

/// Little-endian write of `value` into a register's qubits.
pub fn write_register(state: &mut BasisState, register: &Register, value: u64) {
    assert!(register.width() <= 64, "register too wide for a u64 write");
    if register.width() < 64 {
        assert!(
            value < (1 << register.width()),
            "value {value} does not fit register of width {}",
            register.width()
        );
    }
    for (i, &q) in register.qubits().iter().enumerate() {
        state.set(q, value >> i & 1 == 1);
    }
}
