//! Reversible-logic toolkit for floating-point arithmetic.
//!
//! The crate builds classical reversible circuits (X / CNOT / Toffoli /
//! Fredkin) for integer and floating-point addition and multiplication,
//! simulates them on computational basis states, verifies them bit-exactly
//! against a software reference model, and lowers them to Clifford+T cost
//! figures (T-count, T-depth, KQ).
//!
//! Modules:
//! - [`ir`] — gate-level circuit representation with register allocation and
//!   an ancilla pool.
//! - [`sim`] — basis-state simulator used for exhaustive verification.
//! - [`arith`] — reversible integer blocks: in-place adder, comparator,
//!   constant carry, controlled adder, two's complement, shift-and-add
//!   multiplier.
//! - [`softfloat`] — floating-point encoding and the software reference
//!   model the circuits are checked against.
//! - [`fpcirc`] — floating-point circuit blocks: shifters, first-one,
//!   renormalization, and the full adder / multiplier datapaths.
//! - [`resources`] — Clifford+T accounting: T-count, T-depth, parallel-T
//!   width and KQ.

pub mod arith;
pub mod fpcirc;
pub mod ir;
pub mod resources;
pub mod sim;
pub mod softfloat;
