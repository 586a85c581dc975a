//! Gate-level intermediate representation for reversible circuits.
//!
//! A [`Circuit`] is an ordered list of self-inverse reversible gates over a
//! set of qubits. Qubit indices are globally unique integers per circuit;
//! [`Register`]s are views over them. Freed registers return their qubits to
//! an ancilla pool whose members are guaranteed to be back in state |0>, so
//! later allocations can reuse them without growing the circuit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index of a single qubit within a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit(pub(crate) u32);

impl Qubit {
    /// Position of this qubit in the circuit's global index space.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One reversible primitive. All four kinds are self-inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// NOT on `target`.
    X { target: Qubit },
    /// Flip `target` iff `control` is 1.
    Cnot { control: Qubit, target: Qubit },
    /// Flip `target` iff both controls are 1.
    Toffoli { controls: [Qubit; 2], target: Qubit },
    /// Swap the two targets iff `control` is 1.
    Fredkin { control: Qubit, targets: [Qubit; 2] },
}

impl Gate {
    /// All qubits the gate touches, controls first.
    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        let arr: [Option<Qubit>; 3] = match *self {
            Gate::X { target } => [Some(target), None, None],
            Gate::Cnot { control, target } => [Some(control), Some(target), None],
            Gate::Toffoli { controls, target } => {
                [Some(controls[0]), Some(controls[1]), Some(target)]
            }
            Gate::Fredkin { control, targets } => {
                [Some(control), Some(targets[0]), Some(targets[1])]
            }
        };
        arr.into_iter().flatten()
    }
}

/// Errors raised while constructing circuits.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CircuitError {
    #[error("gate references qubit {0} twice")]
    DuplicateQubit(u32),
    #[error("gate references qubit {0}, which is not allocated")]
    UnallocatedQubit(u32),
    #[error("register {0:?} is not live in this circuit")]
    RegisterNotLive(String),
    #[error("register width must be at least 1")]
    ZeroWidth,
    #[error("registers have mismatched widths: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("constant {0} out of range for {1} bits")]
    ConstantOutOfRange(u64, usize),
}

/// A named, ordered view over circuit qubits. Bit 0 is least significant.
#[derive(Debug, Clone)]
pub struct Register {
    id: u64,
    name: String,
    qubits: Vec<Qubit>,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> usize {
        self.qubits.len()
    }

    /// Qubit holding bit `i` (little-endian).
    pub fn qubit(&self, i: usize) -> Qubit {
        self.qubits[i]
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }
}

/// An ordered reversible gate list plus register bookkeeping.
///
/// Construction is purely additive and single-writer; completed circuits are
/// immutable values that can be shared freely across threads.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    gates: Vec<Gate>,
    qubit_count: u32,
    live: BTreeMap<u64, Vec<Qubit>>,
    pool: BTreeSet<u32>,
    next_register_id: u64,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total number of qubits ever allocated (the high-water mark; freed
    /// qubits are reused before this grows).
    pub fn qubit_count(&self) -> usize {
        self.qubit_count as usize
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Qubits currently in the ancilla pool (free and guaranteed |0>).
    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    /// Allocate a register of `width` qubits initialized to 0, drawing from
    /// the ancilla pool before growing the circuit.
    pub fn alloc_register(&mut self, width: usize, name: &str) -> Result<Register, CircuitError> {
        if width == 0 {
            return Err(CircuitError::ZeroWidth);
        }
        let mut qubits = Vec::with_capacity(width);
        for _ in 0..width {
            if let Some(&q) = self.pool.iter().next() {
                self.pool.remove(&q);
                qubits.push(Qubit(q));
            } else {
                qubits.push(Qubit(self.qubit_count));
                self.qubit_count += 1;
            }
        }
        let id = self.next_register_id;
        self.next_register_id += 1;
        self.live.insert(id, qubits.clone());
        Ok(Register {
            id,
            name: name.to_string(),
            qubits,
        })
    }

    /// Single-qubit convenience wrapper around [`Circuit::alloc_register`].
    pub fn alloc_qubit(&mut self, name: &str) -> Result<Register, CircuitError> {
        self.alloc_register(1, name)
    }

    /// Return a register's qubits to the ancilla pool. The caller must have
    /// restored them to 0 on every reachable basis state; tests enforce this
    /// by simulation.
    pub fn free_register(&mut self, register: Register) -> Result<(), CircuitError> {
        match self.live.remove(&register.id) {
            Some(qubits) => {
                for q in qubits {
                    self.pool.insert(q.0);
                }
                Ok(())
            }
            None => Err(CircuitError::RegisterNotLive(register.name)),
        }
    }

    fn validate_gate(&self, gate: &Gate) -> Result<(), CircuitError> {
        let qs: Vec<Qubit> = gate.qubits().collect();
        for (i, q) in qs.iter().enumerate() {
            if q.0 >= self.qubit_count {
                return Err(CircuitError::UnallocatedQubit(q.0));
            }
            if self.pool.contains(&q.0) {
                return Err(CircuitError::UnallocatedQubit(q.0));
            }
            if qs[..i].contains(q) {
                return Err(CircuitError::DuplicateQubit(q.0));
            }
        }
        Ok(())
    }

    /// Append a gate, checking index validity and pairwise distinctness.
    pub fn emit(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.validate_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn emit_x(&mut self, target: Qubit) {
        self.gates.push(Gate::X { target });
        debug_assert!(self.validate_gate(self.gates.last().unwrap()).is_ok());
    }

    pub fn emit_cnot(&mut self, control: Qubit, target: Qubit) {
        let g = Gate::Cnot { control, target };
        assert!(self.validate_gate(&g).is_ok(), "invalid cnot {control} {target}");
        self.gates.push(g);
    }

    pub fn emit_toffoli(&mut self, c0: Qubit, c1: Qubit, target: Qubit) {
        let g = Gate::Toffoli {
            controls: [c0, c1],
            target,
        };
        assert!(
            self.validate_gate(&g).is_ok(),
            "invalid toffoli {c0} {c1} {target}"
        );
        self.gates.push(g);
    }

    pub fn emit_fredkin(&mut self, control: Qubit, a: Qubit, b: Qubit) {
        let g = Gate::Fredkin {
            control,
            targets: [a, b],
        };
        assert!(
            self.validate_gate(&g).is_ok(),
            "invalid fredkin {control} {a} {b}"
        );
        self.gates.push(g);
    }

    /// The inverse circuit: the gate list reversed. Every primitive here is
    /// self-inverse, so kinds are unchanged.
    pub fn inverse(&self) -> Circuit {
        let mut inv = self.clone();
        inv.gates.reverse();
        inv
    }

    /// Append all gates of `other`, which must be laid out over the same
    /// qubit index space.
    pub fn append(&mut self, other: &Circuit) {
        assert!(other.qubit_count <= self.qubit_count);
        self.gates.extend_from_slice(&other.gates);
    }

    /// Re-emit the inverse of `gates[start..end]` in reverse order.
    ///
    /// This is the compute–copy–uncompute primitive used by block builders:
    /// replaying the exact history backwards restores every qubit the range
    /// touched to its state at `start`, including qubits whose registers
    /// were freed and reallocated inside the range. Validation is skipped
    /// because the replay references historical indices that may currently
    /// sit in the pool.
    pub fn uncompute_range(&mut self, start: usize, end: usize) {
        assert!(start <= end && end <= self.gates.len());
        for i in (start..end).rev() {
            let g = self.gates[i];
            self.gates.push(g);
        }
    }

    /// Live qubits not present in `exclude`, in ascending index order, used
    /// as scratch ("dirty") lines by multi-controlled gate decompositions.
    pub(crate) fn spare_qubits(&self, exclude: &[Qubit], want: usize) -> Vec<Qubit> {
        let excl: BTreeSet<u32> = exclude.iter().map(|q| q.0).collect();
        let mut out = Vec::with_capacity(want);
        for i in 0..self.qubit_count {
            if out.len() == want {
                break;
            }
            if !self.pool.contains(&i) && !excl.contains(&i) {
                out.push(Qubit(i));
            }
        }
        out
    }
}

/// A control qubit together with its polarity (`true` = positive control).
pub type Control = (Qubit, bool);

/// Emit a multi-controlled NOT, decomposed into Toffolis.
///
/// Multi-controlled NOTs are not IR primitives; this lowers them eagerly so
/// gate counts stay exact. With k controls it uses a Toffoli ladder over
/// k-2 pool ancillae when the pool can supply them, and otherwise falls back
/// to a dirty-ancilla V-chain over live spectator qubits (4(k-2) Toffolis)
/// so that peak qubit usage does not grow.
///
/// Negative controls are handled by X-dressing the control line.
pub fn emit_mcx(circuit: &mut Circuit, controls: &[Control], target: Qubit) {
    for &(q, polarity) in controls {
        if !polarity {
            circuit.emit_x(q);
        }
    }
    emit_mcx_positive(circuit, &controls.iter().map(|c| c.0).collect::<Vec<_>>(), target);
    for &(q, polarity) in controls {
        if !polarity {
            circuit.emit_x(q);
        }
    }
}

fn emit_mcx_positive(circuit: &mut Circuit, controls: &[Qubit], target: Qubit) {
    match controls.len() {
        0 => circuit.emit_x(target),
        1 => circuit.emit_cnot(controls[0], target),
        2 => circuit.emit_toffoli(controls[0], controls[1], target),
        k => {
            let need = k - 2;
            if circuit.pool_size() >= need {
                // Clean ladder: and-chain into pool ancillae, apply, unchain.
                let chain = circuit.alloc_register(need, "mcx_chain").unwrap();
                let start = circuit.gate_count();
                circuit.emit_toffoli(controls[0], controls[1], chain.qubit(0));
                for i in 0..need - 1 {
                    circuit.emit_toffoli(chain.qubit(i), controls[i + 2], chain.qubit(i + 1));
                }
                let mid = circuit.gate_count();
                circuit.emit_toffoli(chain.qubit(need - 1), controls[k - 1], target);
                circuit.uncompute_range(start, mid);
                circuit.free_register(chain).unwrap();
            } else if circuit.pool_size() >= 1 && k >= 5 {
                // Split: conjoin half the controls into one ancilla, recurse
                // on the rest; keeps chains within whatever the pool holds.
                let t = circuit.alloc_qubit("mcx_split").unwrap();
                let half = k / 2;
                let start = circuit.gate_count();
                emit_mcx_positive(circuit, &controls[..half], t.qubit(0));
                let mid = circuit.gate_count();
                let mut rest: Vec<Qubit> = controls[half..].to_vec();
                rest.push(t.qubit(0));
                emit_mcx_positive(circuit, &rest, target);
                circuit.uncompute_range(start, mid);
                circuit.free_register(t).unwrap();
            } else {
                // Dirty V-chain (Barenco-style): borrows k-2 live qubits in
                // arbitrary states and restores them; 4(k-2) Toffolis.
                let mut excl = controls.to_vec();
                excl.push(target);
                let dirty = circuit.spare_qubits(&excl, need);
                assert_eq!(
                    dirty.len(),
                    need,
                    "not enough spare qubits for a {k}-controlled NOT"
                );
                let v_pass = |c: &mut Circuit, with_target: bool| {
                    if with_target {
                        c.emit_toffoli(controls[k - 1], dirty[need - 1], target);
                    }
                    for i in (1..need).rev() {
                        c.emit_toffoli(controls[i + 1], dirty[i - 1], dirty[i]);
                    }
                    c.emit_toffoli(controls[0], controls[1], dirty[0]);
                    for i in 1..need {
                        c.emit_toffoli(controls[i + 1], dirty[i - 1], dirty[i]);
                    }
                    if with_target {
                        c.emit_toffoli(controls[k - 1], dirty[need - 1], target);
                    }
                };
                v_pass(circuit, true);
                v_pass(circuit, false);
            }
        }
    }
}

// --- circuit text format ------------------------------------------------
//
// One gate per line, lowercase mnemonics, zero-based indices:
//   qubits N
//   x t
//   cx c t
//   ccx c1 c2 t
//   cswap c a b

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.qubit_count)?;
        for g in &self.gates {
            match *g {
                Gate::X { target } => writeln!(f, "x {target}")?,
                Gate::Cnot { control, target } => writeln!(f, "cx {control} {target}")?,
                Gate::Toffoli { controls, target } => {
                    writeln!(f, "ccx {} {} {target}", controls[0], controls[1])?
                }
                Gate::Fredkin { control, targets } => {
                    writeln!(f, "cswap {control} {} {}", targets[0], targets[1])?
                }
            }
        }
        Ok(())
    }
}

/// Errors from parsing the circuit text format.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {0}: expected `qubits N` header")]
    MissingHeader(usize),
    #[error("line {0}: unknown mnemonic `{1}`")]
    UnknownMnemonic(usize, String),
    #[error("line {0}: expected {1} qubit indices")]
    BadArity(usize, usize),
    #[error("line {0}: invalid index `{1}`")]
    BadIndex(usize, String),
    #[error("line {0}: {1}")]
    BadGate(usize, CircuitError),
}

/// Parse the circuit text format produced by [`Circuit`]'s `Display`.
///
/// The parsed circuit exposes all `N` qubits as a single live register so
/// every gate line is valid.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines.next().ok_or(ParseError::MissingHeader(1))?;
    let n: usize = header
        .strip_prefix("qubits ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or(ParseError::MissingHeader(ln))?;
    let mut circuit = Circuit::new();
    if n > 0 {
        circuit.alloc_register(n, "q").map_err(|e| ParseError::BadGate(ln, e))?;
    }
    for (ln, line) in lines {
        let mut parts = line.split_ascii_whitespace();
        let mnemonic = parts.next().unwrap();
        let idx: Result<Vec<u32>, ParseError> = parts
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|_| ParseError::BadIndex(ln, s.to_string()))
            })
            .collect();
        let idx = idx?;
        let gate = match (mnemonic, idx.len()) {
            ("x", 1) => Gate::X { target: Qubit(idx[0]) },
            ("cx", 2) => Gate::Cnot {
                control: Qubit(idx[0]),
                target: Qubit(idx[1]),
            },
            ("ccx", 3) => Gate::Toffoli {
                controls: [Qubit(idx[0]), Qubit(idx[1])],
                target: Qubit(idx[2]),
            },
            ("cswap", 3) => Gate::Fredkin {
                control: Qubit(idx[0]),
                targets: [Qubit(idx[1]), Qubit(idx[2])],
            },
            ("x", _) => return Err(ParseError::BadArity(ln, 1)),
            ("cx", _) => return Err(ParseError::BadArity(ln, 2)),
            ("ccx", _) | ("cswap", _) => return Err(ParseError::BadArity(ln, 3)),
            _ => return Err(ParseError::UnknownMnemonic(ln, mnemonic.to_string())),
        };
        circuit.emit(gate).map_err(|e| ParseError::BadGate(ln, e))?;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate, BasisState};

    #[test]
    fn fresh_allocation_uses_new_indices() {
        let mut c = Circuit::new();
        let r = c.alloc_register(3, "p").unwrap();
        assert_eq!(r.qubits(), &[Qubit(0), Qubit(1), Qubit(2)]);
        assert_eq!(c.qubit_count(), 3);
    }

    #[test]
    fn freed_register_is_reused() {
        let mut c = Circuit::new();
        let r = c.alloc_register(3, "t").unwrap();
        let ids: Vec<_> = r.qubits().to_vec();
        c.free_register(r).unwrap();
        let r2 = c.alloc_register(3, "u").unwrap();
        assert_eq!(r2.qubits(), &ids[..]);
        assert_eq!(c.qubit_count(), 3);
    }

    #[test]
    fn successive_allocations_are_disjoint() {
        let mut c = Circuit::new();
        let a = c.alloc_register(4, "a").unwrap();
        let b = c.alloc_register(4, "b").unwrap();
        assert!(a.qubits().iter().all(|q| !b.qubits().contains(q)));
        assert_eq!(c.qubit_count(), 8);
    }

    #[test]
    fn double_free_is_an_error() {
        let mut c = Circuit::new();
        let r = c.alloc_register(2, "t").unwrap();
        let r_copy = r.clone();
        c.free_register(r).unwrap();
        assert!(matches!(
            c.free_register(r_copy),
            Err(CircuitError::RegisterNotLive(_))
        ));
    }

    #[test]
    fn free_then_alloc_shrinks_pool() {
        let mut c = Circuit::new();
        let r = c.alloc_register(3, "t").unwrap();
        c.free_register(r).unwrap();
        assert_eq!(c.pool_size(), 3);
        let _one = c.alloc_register(1, "u").unwrap();
        assert_eq!(c.pool_size(), 2);
    }

    #[test]
    fn emit_validates_arity_and_indices() {
        let mut c = Circuit::new();
        let r = c.alloc_register(3, "q").unwrap();
        c.emit(Gate::Toffoli {
            controls: [r.qubit(0), r.qubit(1)],
            target: r.qubit(2),
        })
        .unwrap();
        assert_eq!(c.gate_count(), 1);
        assert_eq!(
            c.emit(Gate::Cnot {
                control: r.qubit(0),
                target: r.qubit(0)
            }),
            Err(CircuitError::DuplicateQubit(0))
        );
        assert_eq!(
            c.emit(Gate::X { target: Qubit(5) }),
            Err(CircuitError::UnallocatedQubit(5))
        );
    }

    #[test]
    fn emitting_on_pooled_qubit_is_rejected() {
        let mut c = Circuit::new();
        let a = c.alloc_register(2, "a").unwrap();
        let t = a.qubit(1);
        let _keep = c.alloc_register(1, "k").unwrap();
        c.free_register(a).unwrap();
        assert!(matches!(
            c.emit(Gate::X { target: t }),
            Err(CircuitError::UnallocatedQubit(_))
        ));
    }

    #[test]
    fn inverse_reverses_gate_order() {
        let mut c = Circuit::new();
        let r = c.alloc_register(2, "q").unwrap();
        c.emit_x(r.qubit(0));
        c.emit_cnot(r.qubit(0), r.qubit(1));
        let inv = c.inverse();
        assert_eq!(
            inv.gates()[0],
            Gate::Cnot {
                control: r.qubit(0),
                target: r.qubit(1)
            }
        );
        assert_eq!(inv.gates()[1], Gate::X { target: r.qubit(0) });
    }

    #[test]
    fn inverse_is_an_involution() {
        let mut c = Circuit::new();
        let r = c.alloc_register(3, "q").unwrap();
        c.emit_toffoli(r.qubit(0), r.qubit(1), r.qubit(2));
        c.emit_x(r.qubit(1));
        assert_eq!(c.inverse().inverse().gates(), c.gates());
    }

    #[test]
    fn circuit_then_inverse_is_identity_on_random_states() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut c = Circuit::new();
        let r = c.alloc_register(16, "q").unwrap();
        for _ in 0..200 {
            match rng.gen_range(0..4) {
                0 => c.emit_x(r.qubit(rng.gen_range(0..16))),
                1 => {
                    let a = rng.gen_range(0..16);
                    let b = (a + rng.gen_range(1..16)) % 16;
                    c.emit_cnot(r.qubit(a), r.qubit(b));
                }
                2 => {
                    let a = rng.gen_range(0..16);
                    let b = (a + rng.gen_range(1..16)) % 16;
                    let t = (b + rng.gen_range(1..15)) % 16;
                    if t != a && t != b {
                        c.emit_toffoli(r.qubit(a), r.qubit(b), r.qubit(t));
                    }
                }
                _ => {
                    let a = rng.gen_range(0..16);
                    let b = (a + rng.gen_range(1..16)) % 16;
                    let t = (b + rng.gen_range(1..15)) % 16;
                    if t != a && t != b {
                        c.emit_fredkin(r.qubit(a), r.qubit(b), r.qubit(t));
                    }
                }
            }
        }
        let mut full = c.clone();
        full.append(&c.inverse());
        for _ in 0..10_000 {
            let bits: Vec<bool> = (0..16).map(|_| rng.gen()).collect();
            let state = BasisState::from_bits(&bits);
            assert_eq!(simulate(&full, &state).bits(), state.bits());
        }
    }

    #[test]
    fn mcx_matches_logical_and_for_all_patterns() {
        for k in 0..=5usize {
            for polarity_mask in 0..(1u32 << k) {
                let mut c = Circuit::new();
                let ctrls = c.alloc_register(k.max(1), "c").unwrap();
                let t = c.alloc_qubit("t").unwrap();
                // extra idle lines so the dirty path has spares to borrow
                let spare = c.alloc_register(4, "spare").unwrap();
                let controls: Vec<Control> = (0..k)
                    .map(|i| (ctrls.qubit(i), polarity_mask >> i & 1 == 1))
                    .collect();
                emit_mcx(&mut c, &controls, t.qubit(0));
                for pattern in 0..(1u64 << k) {
                    for spare_pattern in 0..2u64 {
                        let mut state = BasisState::zero(c.qubit_count());
                        for i in 0..k {
                            state.set(ctrls.qubit(i), pattern >> i & 1 == 1);
                        }
                        for i in 0..4 {
                            state.set(spare.qubit(i), spare_pattern == 1);
                        }
                        let out = simulate(&c, &state);
                        let expect = (0..k)
                            .all(|i| (pattern >> i & 1 == 1) == (polarity_mask >> i & 1 == 1));
                        assert_eq!(out.get(t.qubit(0)), expect, "k={k} pattern={pattern:b}");
                        // controls and spares restored
                        for i in 0..k {
                            assert_eq!(out.get(ctrls.qubit(i)), pattern >> i & 1 == 1);
                        }
                        for i in 0..4 {
                            assert_eq!(out.get(spare.qubit(i)), spare_pattern == 1);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mcx_dirty_path_used_when_pool_empty() {
        // 5 controls with an empty pool must still work by borrowing live
        // spectator lines.
        let mut c = Circuit::new();
        let ctrls = c.alloc_register(5, "c").unwrap();
        let t = c.alloc_qubit("t").unwrap();
        let spect = c.alloc_register(3, "s").unwrap();
        assert_eq!(c.pool_size(), 0);
        let controls: Vec<Control> = (0..5).map(|i| (ctrls.qubit(i), true)).collect();
        emit_mcx(&mut c, &controls, t.qubit(0));
        assert_eq!(c.qubit_count(), 9, "dirty mcx must not allocate");
        for pattern in 0..32u64 {
            for sp in 0..8u64 {
                let mut state = BasisState::zero(c.qubit_count());
                for i in 0..5 {
                    state.set(ctrls.qubit(i), pattern >> i & 1 == 1);
                }
                for i in 0..3 {
                    state.set(spect.qubit(i), sp >> i & 1 == 1);
                }
                let out = simulate(&c, &state);
                assert_eq!(out.get(t.qubit(0)), pattern == 31);
                for i in 0..3 {
                    assert_eq!(out.get(spect.qubit(i)), sp >> i & 1 == 1, "spectator changed");
                }
            }
        }
    }

    #[test]
    fn text_format_round_trips() {
        let mut c = Circuit::new();
        let r = c.alloc_register(4, "q").unwrap();
        c.emit_x(r.qubit(3));
        c.emit_cnot(r.qubit(0), r.qubit(1));
        c.emit_toffoli(r.qubit(0), r.qubit(1), r.qubit(2));
        c.emit_fredkin(r.qubit(3), r.qubit(0), r.qubit(2));
        let text = c.to_string();
        assert_eq!(text, "qubits 4\nx 3\ncx 0 1\nccx 0 1 2\ncswap 3 0 2\n");
        let parsed = parse_circuit(&text).unwrap();
        assert_eq!(parsed.gates(), c.gates());
        assert_eq!(parsed.qubit_count(), 4);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_circuit("x 0\n").is_err());
        assert!(parse_circuit("qubits 2\nfoo 0\n").is_err());
        assert!(parse_circuit("qubits 2\nccx 0 1\n").is_err());
        assert!(parse_circuit("qubits 2\ncx 0 2\n").is_err());
        assert!(parse_circuit("qubits 2\ncx 0 0\n").is_err());
    }
}
