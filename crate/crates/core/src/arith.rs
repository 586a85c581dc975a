//! Reversible integer building blocks.
//!
//! The in-place adder is the ancilla-free ripple construction of
//! Takahashi, Tani and Kunihiro; everything else (comparator, constant
//! carry, controlled adder, two's complement, shift-and-add multiplier) is
//! assembled from it. All builders take little-endian qubit slices so that
//! composite register views can be wired through them.

use crate::ir::{emit_mcx, Circuit, CircuitError, Control, Gate, Qubit, Register};

fn check_disjoint(a: &[Qubit], b: &[Qubit]) {
    debug_assert!(
        a.iter().all(|q| !b.contains(q)),
        "operand registers must be disjoint"
    );
}

/// Gate sequence for `b <- a + b (mod 2^n)` with `a` preserved.
/// Ancilla-free ripple adder (Takahashi-Tani-Kunihiro), 2n-2 Toffolis.
fn adder_gates(a: &[Qubit], b: &[Qubit]) -> Vec<Gate> {
    assert_eq!(a.len(), b.len(), "addend widths must match");
    check_disjoint(a, b);
    let n = a.len();
    let mut g = Vec::with_capacity(6 * n);
    let cnot = |control: Qubit, target: Qubit| Gate::Cnot { control, target };
    let toffoli = |c0: Qubit, c1: Qubit, target: Qubit| Gate::Toffoli {
        controls: [c0, c1],
        target,
    };
    if n == 0 {
        return g;
    }
    if n == 1 {
        g.push(cnot(a[0], b[0]));
        return g;
    }
    for i in 1..n {
        g.push(cnot(a[i], b[i]));
    }
    for i in (1..n - 1).rev() {
        g.push(cnot(a[i], a[i + 1]));
    }
    for i in 0..n - 1 {
        g.push(toffoli(a[i], b[i], a[i + 1]));
    }
    for i in (1..n).rev() {
        g.push(cnot(a[i], b[i]));
        g.push(toffoli(a[i - 1], b[i - 1], a[i]));
    }
    for i in 1..n - 1 {
        g.push(cnot(a[i], a[i + 1]));
    }
    for i in 1..n {
        g.push(cnot(a[i], b[i]));
    }
    g.push(cnot(a[0], b[0]));
    g
}

/// In-place addition on qubit slices: `b <- a + b (mod 2^n)`, `a` preserved.
pub fn add_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit]) {
    for gate in adder_gates(a, b) {
        circuit.emit(gate).expect("adder gate");
    }
}

/// In-place subtraction: `b <- b - a (mod 2^n)`, `a` preserved.
///
/// The adder's gate sequence run backwards; every gate is self-inverse.
pub fn sub_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit]) {
    for gate in adder_gates(a, b).into_iter().rev() {
        circuit.emit(gate).expect("subtractor gate");
    }
}

/// In-place addition of register `a` into register `b` (`b <- a + b mod 2^n`).
pub fn build_adder(circuit: &mut Circuit, a: &Register, b: &Register) -> Result<(), CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    add_into(circuit, a.qubits(), b.qubits());
    Ok(())
}

/// `b <- a + b mod 2^n`, with the n-th sum bit written to `carry_out`
/// (which must start at 0).
///
/// Implemented as an (n+1)-bit add whose top addend bit is a borrowed zero.
pub fn build_adder_with_carry(
    circuit: &mut Circuit,
    a: &Register,
    b: &Register,
    carry_out: Qubit,
) -> Result<(), CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    add_with_carry_into(circuit, a.qubits(), b.qubits(), carry_out);
    Ok(())
}

/// Slice form of [`build_adder_with_carry`]: 2n-1 Toffolis, no ancilla.
///
/// The top carry is tapped directly into `carry_out` (one CNOT while the
/// ripple prefix is staged plus one Toffoli at the crest of the carry
/// chain) instead of running the adder a bit wider.
pub fn add_with_carry_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit], carry_out: Qubit) {
    assert_eq!(a.len(), b.len(), "addend widths must match");
    check_disjoint(a, b);
    let n = a.len();
    if n == 0 {
        return;
    }
    if n == 1 {
        circuit.emit_toffoli(a[0], b[0], carry_out);
        circuit.emit_cnot(a[0], b[0]);
        return;
    }
    for i in 1..n {
        circuit.emit_cnot(a[i], b[i]);
    }
    circuit.emit_cnot(a[n - 1], carry_out);
    for i in (1..n - 1).rev() {
        circuit.emit_cnot(a[i], a[i + 1]);
    }
    for i in 0..n - 1 {
        circuit.emit_toffoli(a[i], b[i], a[i + 1]);
    }
    circuit.emit_toffoli(a[n - 1], b[n - 1], carry_out);
    for i in (1..n).rev() {
        circuit.emit_cnot(a[i], b[i]);
        circuit.emit_toffoli(a[i - 1], b[i - 1], a[i]);
    }
    for i in 1..n - 1 {
        circuit.emit_cnot(a[i], a[i + 1]);
    }
    for i in 1..n {
        circuit.emit_cnot(a[i], b[i]);
    }
    circuit.emit_cnot(a[0], b[0]);
}

/// Strict unsigned comparison: `result <- (a < b)`, both inputs restored,
/// `result` must start at 0.
///
/// Performs a subtraction widened by one qubit (the result bit), then an
/// addition on the low n bits to restore the minuend.
pub fn build_comparator(
    circuit: &mut Circuit,
    a: &Register,
    b: &Register,
    result: Qubit,
) -> Result<(), CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    compare_lt_into(circuit, a.qubits(), b.qubits(), result);
    Ok(())
}

/// Slice form of [`build_comparator`]: `result <- (a < b)` unsigned.
pub fn compare_lt_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit], result: Qubit) {
    let n = a.len();
    // (n+1)-bit view of a with the result qubit as its top (sign) bit.
    let mut wide_a = a.to_vec();
    wide_a.push(result);
    let pad = circuit.alloc_qubit("cmp_pad").unwrap();
    let mut wide_b = b.to_vec();
    wide_b.push(pad.qubit(0));
    // wide_a <- a - b; the top bit is set iff a < b.
    sub_into(circuit, &wide_b, &wide_a);
    // Restore the low n bits: (a - b) + b = a.
    add_into(circuit, b, &wide_a[..n]);
    circuit.free_register(pad).unwrap();
}

/// Signed (two's-complement) strict comparison: `result <- (a <s b)`.
///
/// Flipping both top bits maps two's-complement order onto unsigned order.
pub fn compare_lt_signed_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit], result: Qubit) {
    let n = a.len();
    circuit.emit_x(a[n - 1]);
    circuit.emit_x(b[n - 1]);
    compare_lt_into(circuit, a, b, result);
    circuit.emit_x(a[n - 1]);
    circuit.emit_x(b[n - 1]);
}

/// Carry of `a + c` for a classically known constant:
/// `result <- bit n of (a + c)`, with `a` and all ancillae restored.
///
/// Ripple CARRY ladder for constant comparison: carries are computed into a
/// chain of ancillae, the top carry is copied out, and the chain is
/// uncomputed.
pub fn build_carry_const(
    circuit: &mut Circuit,
    a: &Register,
    c: u64,
    result: Qubit,
) -> Result<(), CircuitError> {
    let n = a.width();
    if n < 64 && c >= (1 << n) {
        return Err(CircuitError::ConstantOutOfRange(c, n));
    }
    carry_const_into(circuit, a.qubits(), c, result, &[]);
    Ok(())
}

/// Slice form of [`build_carry_const`]; `extra_controls` gate the final
/// copy-out of the carry so callers can fold a flag conjunction into it.
pub fn carry_const_into(
    circuit: &mut Circuit,
    a: &[Qubit],
    c: u64,
    result: Qubit,
    extra_controls: &[Control],
) {
    carry_const_with_cin(circuit, a, c, None, result, extra_controls);
}

/// Carry ladder with an optional incoming-carry qubit. When the pool
/// cannot supply a full chain the operand is split in half: the low half's
/// carry is computed into one ancilla, fed into the high half's ladder as
/// its incoming carry, and uncomputed again, keeping the peak chain short.
fn carry_const_with_cin(
    circuit: &mut Circuit,
    a: &[Qubit],
    c: u64,
    cin: Option<Qubit>,
    result: Qubit,
    extra_controls: &[Control],
) {
    let n = a.len();
    assert!(n >= 1);
    let emit_out = |circuit: &mut Circuit, base: &[Control]| {
        let mut ctrls = extra_controls.to_vec();
        ctrls.extend_from_slice(base);
        emit_mcx(circuit, &ctrls, result);
    };
    if n == 1 {
        // result ^= maj(a_0, c_0, cin)
        match (c & 1 == 1, cin) {
            (false, None) => {}
            (true, None) => emit_out(circuit, &[(a[0], true)]),
            (false, Some(k)) => emit_out(circuit, &[(a[0], true), (k, true)]),
            (true, Some(k)) => {
                emit_out(circuit, &[(a[0], true), (k, true)]);
                emit_out(circuit, &[(a[0], true)]);
                emit_out(circuit, &[(k, true)]);
            }
        }
        return;
    }
    if circuit.pool_size() < n - 1 && n >= 4 {
        // split so the high half's ladder just fits the pool: the carry of
        // the low half becomes the high half's carry-in
        let low = n.saturating_sub(circuit.pool_size()).clamp(2, n - 2);
        let t = circuit.alloc_qubit("carry_split").unwrap();
        let start = circuit.gate_count();
        carry_const_with_cin(circuit, &a[..low], c & ((1 << low) - 1), cin, t.qubit(0), &[]);
        let mid = circuit.gate_count();
        carry_const_with_cin(circuit, &a[low..], c >> low, Some(t.qubit(0)), result, extra_controls);
        circuit.uncompute_range(start, mid);
        circuit.free_register(t).unwrap();
        return;
    }
    // With no incoming carry, the chain below the lowest set constant bit
    // is identically zero and can be skipped.
    if cin.is_none() && c == 0 {
        return;
    }
    let skip = if cin.is_none() {
        (c.trailing_zeros() as usize).min(n - 1)
    } else {
        0
    };
    if skip == n - 1 {
        // only the top constant bit is set: carry = a_{n-1} & c_{n-1}
        emit_out(circuit, &[(a[n - 1], true)]);
        return;
    }
    let a = &a[skip..];
    let c = c >> skip;
    let n = a.len();
    // chain[i] holds the carry into bit i+1
    let chain = circuit.alloc_register(n - 1, "carry_chain").unwrap();
    let start = circuit.gate_count();
    match (c & 1 == 1, cin) {
        (false, None) => {}
        (true, None) => circuit.emit_cnot(a[0], chain.qubit(0)),
        (false, Some(k)) => circuit.emit_toffoli(a[0], k, chain.qubit(0)),
        (true, Some(k)) => {
            circuit.emit_toffoli(a[0], k, chain.qubit(0));
            circuit.emit_cnot(a[0], chain.qubit(0));
            circuit.emit_cnot(k, chain.qubit(0));
        }
    }
    for i in 1..n - 1 {
        // carry_{i+1} = maj(a_i, c_i, carry_i)
        circuit.emit_toffoli(a[i], chain.qubit(i - 1), chain.qubit(i));
        if c >> i & 1 == 1 {
            circuit.emit_cnot(a[i], chain.qubit(i));
            circuit.emit_cnot(chain.qubit(i - 1), chain.qubit(i));
        }
    }
    let mid = circuit.gate_count();
    // result ^= maj(a_{n-1}, c_{n-1}, carry_{n-1})
    let top_a = a[n - 1];
    let top_chain = chain.qubit(n - 2);
    emit_out(circuit, &[(top_a, true), (top_chain, true)]);
    if c >> (n - 1) & 1 == 1 {
        emit_out(circuit, &[(top_a, true)]);
        emit_out(circuit, &[(top_chain, true)]);
    }
    // The ladder never touches `a`, so replaying it backwards clears it.
    circuit.uncompute_range(start, mid);
    circuit.free_register(chain).unwrap();
}

/// Controlled in-place addition: if `ctrl` = 1 then `b <- a + b mod 2^n`.
///
/// Materializes the masked addend `a & ctrl` into pool ancillae, adds it,
/// and uncomputes the mask.
pub fn build_ctrl_adder(
    circuit: &mut Circuit,
    ctrl: Qubit,
    a: &Register,
    b: &Register,
) -> Result<(), CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    ctrl_add_into(circuit, ctrl, a.qubits(), b.qubits());
    Ok(())
}

/// Slice form of [`build_ctrl_adder`].
pub fn ctrl_add_into(circuit: &mut Circuit, ctrl: Qubit, a: &[Qubit], b: &[Qubit]) {
    with_masked_addend(circuit, ctrl, a, |circuit, masked| {
        add_into(circuit, masked, b);
    });
}

/// Controlled slice addition with a carry-out qubit (initially 0).
pub fn ctrl_add_with_carry_into(
    circuit: &mut Circuit,
    ctrl: Qubit,
    a: &[Qubit],
    b: &[Qubit],
    carry_out: Qubit,
) {
    with_masked_addend(circuit, ctrl, a, |circuit, masked| {
        add_with_carry_into(circuit, masked, b, carry_out);
    });
}

fn with_masked_addend(
    circuit: &mut Circuit,
    ctrl: Qubit,
    a: &[Qubit],
    body: impl FnOnce(&mut Circuit, &[Qubit]),
) {
    let n = a.len();
    let masked = circuit.alloc_register(n, "masked_addend").unwrap();
    let start = circuit.gate_count();
    for i in 0..n {
        circuit.emit_toffoli(ctrl, a[i], masked.qubit(i));
    }
    let mid = circuit.gate_count();
    body(circuit, masked.qubits());
    // The mask gates only read ctrl and a, which the body leaves intact.
    circuit.uncompute_range(start, mid);
    circuit.free_register(masked).unwrap();
}

/// Controlled increment: if `ctrl` = 1 then `a <- a + 1 mod 2^n`.
///
/// Uses a clean ripple ladder when the pool can supply n-1 ancillae;
/// otherwise it increments the (n+1)-bit register `[ctrl, a]` using the
/// borrowed-register identity `v - g - ~g = v + 1 (mod 2^m)` over live
/// spectator qubits, then restores `ctrl` with an X. Peak qubit usage never
/// grows in the borrowed variant.
pub fn build_incrementer(circuit: &mut Circuit, ctrl: Qubit, a: &Register) {
    ctrl_increment_into(circuit, ctrl, a.qubits());
}

/// Slice form of [`build_incrementer`].
pub fn ctrl_increment_into(circuit: &mut Circuit, ctrl: Qubit, a: &[Qubit]) {
    let n = a.len();
    match n {
        0 => {}
        1 => circuit.emit_cnot(ctrl, a[0]),
        2 => {
            circuit.emit_toffoli(ctrl, a[0], a[1]);
            circuit.emit_cnot(ctrl, a[0]);
        }
        _ => {
            if circuit.pool_size() >= n - 1 {
                ctrl_increment_clean(circuit, ctrl, a);
            } else if has_spares(circuit, ctrl, a) {
                increment_dirty(circuit, ctrl, a);
            } else {
                // nothing to borrow anywhere: let the ladder allocate
                ctrl_increment_clean(circuit, ctrl, a);
            }
        }
    }
}

/// Ripple ladder with clean ancillae: chain[i] = ctrl & a_0 & ... & a_i.
/// Flips are applied top-down, interleaved with the ladder uncompute so
/// every chain qubit is cleared while the bits below it are still
/// unmodified. 2n-2 Toffolis, n-1 pool ancillae.
fn ctrl_increment_clean(circuit: &mut Circuit, ctrl: Qubit, a: &[Qubit]) {
    let n = a.len();
    let chain = circuit.alloc_register(n - 1, "inc_chain").unwrap();
    circuit.emit_toffoli(ctrl, a[0], chain.qubit(0));
    for i in 1..n - 1 {
        circuit.emit_toffoli(chain.qubit(i - 1), a[i], chain.qubit(i));
    }
    circuit.emit_cnot(chain.qubit(n - 2), a[n - 1]);
    for i in (1..n - 1).rev() {
        circuit.emit_toffoli(chain.qubit(i - 1), a[i], chain.qubit(i));
        circuit.emit_cnot(chain.qubit(i - 1), a[i]);
    }
    circuit.emit_toffoli(ctrl, a[0], chain.qubit(0));
    circuit.emit_cnot(ctrl, a[0]);
    circuit.free_register(chain).unwrap();
}

fn has_spares(circuit: &Circuit, ctrl: Qubit, a: &[Qubit]) -> bool {
    let mut excl = a.to_vec();
    excl.push(ctrl);
    circuit.spare_qubits(&excl, a.len() + 1).len() == a.len() + 1
}

/// Borrowed-register increment of the extended value `[ctrl, a]`:
/// incrementing with ctrl as the least-significant bit adds 1 to `a`
/// exactly when ctrl is set, and the trailing X restores ctrl.
fn increment_dirty(circuit: &mut Circuit, ctrl: Qubit, a: &[Qubit]) {
    let mut v = Vec::with_capacity(a.len() + 1);
    v.push(ctrl);
    v.extend_from_slice(a);
    let g = circuit.spare_qubits(&v, v.len());
    assert_eq!(
        g.len(),
        v.len(),
        "not enough spare qubits for a borrowed increment"
    );
    // v - g - ~g = v - (2^m - 1) = v + 1 (mod 2^m)
    sub_into(circuit, &g, &v);
    for &q in &g {
        circuit.emit_x(q);
    }
    sub_into(circuit, &g, &v);
    for &q in &g {
        circuit.emit_x(q);
    }
    circuit.emit_x(ctrl);
}

/// Conditional two's-complement negation: if `sign` = 1 then
/// `m <- (~m + 1) mod 2^n`, else `m` is unchanged.
///
/// Applying the operation twice with the same sign restores `m`.
pub fn build_twos_complement(circuit: &mut Circuit, sign: Qubit, m: &Register) {
    negate_if_into(circuit, sign, m.qubits());
}

/// Slice form of [`build_twos_complement`].
pub fn negate_if_into(circuit: &mut Circuit, sign: Qubit, m: &[Qubit]) {
    for &q in m {
        circuit.emit_cnot(sign, q);
    }
    ctrl_increment_into(circuit, sign, m);
}

/// Shift-and-add multiplication into a zeroed double-width register:
/// `out <- a * b`, inputs restored.
///
/// Iterates over the bits of `a` from least significant, adding `b` shifted
/// by `i` into `out` under control of `a_i`. Behaviour is undefined if `out`
/// is not zero on entry (reversible circuits cannot test-and-branch, so the
/// precondition is documented rather than checked).
pub fn build_multiplier(
    circuit: &mut Circuit,
    a: &Register,
    b: &Register,
    out: &Register,
) -> Result<(), CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    if out.width() != 2 * a.width() {
        return Err(CircuitError::WidthMismatch(out.width(), 2 * a.width()));
    }
    mul_into(circuit, a.qubits(), b.qubits(), out.qubits());
    Ok(())
}

/// Out-of-place fixed-point multiplication with a full double-width
/// intermediate: the 2n-bit product is formed in a work register, its top
/// n bits (the fixed-point fraction window) are copied to `out`, and the
/// work register is uncomputed. Inputs and all ancillae are restored;
/// `out` must start at zero.
pub fn build_fixed_multiplier(
    circuit: &mut Circuit,
    a: &Register,
    b: &Register,
    out: &Register,
) -> Result<(), CircuitError> {
    let n = a.width();
    if b.width() != n {
        return Err(CircuitError::WidthMismatch(b.width(), n));
    }
    if out.width() != n {
        return Err(CircuitError::WidthMismatch(out.width(), n));
    }
    let product = circuit.alloc_register(2 * n, "product")?;
    let start = circuit.gate_count();
    mul_into(circuit, a.qubits(), b.qubits(), product.qubits());
    let mid = circuit.gate_count();
    for i in 0..n {
        circuit.emit_cnot(product.qubit(n + i), out.qubit(i));
    }
    circuit.uncompute_range(start, mid);
    circuit.free_register(product)?;
    Ok(())
}

/// Slice form of [`build_multiplier`]: `out` has width `a.len() + b.len()`.
pub fn mul_into(circuit: &mut Circuit, a: &[Qubit], b: &[Qubit], out: &[Qubit]) {
    let n = a.len();
    let m = b.len();
    assert_eq!(out.len(), n + m);
    if n == 0 || m == 0 {
        return;
    }
    // First partial product is a plain masked copy: out is still zero.
    for j in 0..m {
        circuit.emit_toffoli(a[0], b[j], out[j]);
    }
    for i in 1..n {
        // out above bit i+m-1 is still zero, so the carry lands cleanly.
        ctrl_add_with_carry_into(circuit, a[i], b, &out[i..i + m], out[i + m]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Circuit;
    use crate::sim::{read_register, simulate, write_register, BasisState};

    #[test]
    fn adder_small_cases() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        build_adder(&mut c, &ra, &rb).unwrap();
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 3);
        write_register(&mut s, &rb, 5);
        let out = simulate(&c, &s);
        assert_eq!((read_register(&out, &ra), read_register(&out, &rb)), (3, 8));
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 9);
        write_register(&mut s, &rb, 9);
        let out = simulate(&c, &s);
        assert_eq!(read_register(&out, &rb), 2, "wraps mod 16");
    }

    #[test]
    fn adder_is_ancilla_free() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(6, "a").unwrap();
        let rb = c.alloc_register(6, "b").unwrap();
        build_adder(&mut c, &ra, &rb).unwrap();
        assert_eq!(c.qubit_count(), 12, "no net new qubits beyond a and b");
    }

    #[test]
    fn adder_exhaustive_n_up_to_6() {
        for n in 1..=6usize {
            let mut c = Circuit::new();
            let ra = c.alloc_register(n, "a").unwrap();
            let rb = c.alloc_register(n, "b").unwrap();
            build_adder(&mut c, &ra, &rb).unwrap();
            let mask = (1u64 << n) - 1;
            for a in 0..=mask {
                for b in 0..=mask {
                    let mut s = BasisState::zero(c.qubit_count());
                    write_register(&mut s, &ra, a);
                    write_register(&mut s, &rb, b);
                    let out = simulate(&c, &s);
                    assert_eq!(read_register(&out, &ra), a, "a preserved n={n}");
                    assert_eq!(read_register(&out, &rb), (a + b) & mask, "n={n} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn subtraction_exhaustive_n4() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        sub_into(&mut c, ra.qubits(), rb.qubits());
        for a in 0..16u64 {
            for b in 0..16u64 {
                let mut s = BasisState::zero(c.qubit_count());
                write_register(&mut s, &ra, a);
                write_register(&mut s, &rb, b);
                let out = simulate(&c, &s);
                assert_eq!(read_register(&out, &ra), a);
                assert_eq!(read_register(&out, &rb), b.wrapping_sub(a) & 15);
            }
        }
    }

    #[test]
    fn adder_with_carry_cases_and_exhaustive_n5() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        let cy = c.alloc_qubit("cy").unwrap();
        build_adder_with_carry(&mut c, &ra, &rb, cy.qubit(0)).unwrap();
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 15);
        write_register(&mut s, &rb, 1);
        let out = simulate(&c, &s);
        assert_eq!(read_register(&out, &rb), 0);
        assert!(out.get(cy.qubit(0)));
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 0);
        write_register(&mut s, &rb, 7);
        let out = simulate(&c, &s);
        assert_eq!(read_register(&out, &rb), 7);
        assert!(!out.get(cy.qubit(0)));

        let mut c = Circuit::new();
        let ra = c.alloc_register(5, "a").unwrap();
        let rb = c.alloc_register(5, "b").unwrap();
        let cy = c.alloc_qubit("cy").unwrap();
        build_adder_with_carry(&mut c, &ra, &rb, cy.qubit(0)).unwrap();
        for a in 0..32u64 {
            for b in 0..32u64 {
                let mut s = BasisState::zero(c.qubit_count());
                write_register(&mut s, &ra, a);
                write_register(&mut s, &rb, b);
                let out = simulate(&c, &s);
                assert_eq!(read_register(&out, &rb), (a + b) & 31);
                assert_eq!(out.get(cy.qubit(0)), a + b >= 32, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn comparator_restores_inputs_and_is_strict() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        let r = c.alloc_qubit("lt").unwrap();
        build_comparator(&mut c, &ra, &rb, r.qubit(0)).unwrap();
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 2);
        write_register(&mut s, &rb, 7);
        let out = simulate(&c, &s);
        assert!(out.get(r.qubit(0)));
        assert_eq!(read_register(&out, &ra), 2);
        assert_eq!(read_register(&out, &rb), 7);
        // equality is not less-than
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 9);
        write_register(&mut s, &rb, 9);
        assert!(!simulate(&c, &s).get(r.qubit(0)));
    }

    #[test]
    fn comparator_exhaustive_n5() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(5, "a").unwrap();
        let rb = c.alloc_register(5, "b").unwrap();
        let r = c.alloc_qubit("lt").unwrap();
        build_comparator(&mut c, &ra, &rb, r.qubit(0)).unwrap();
        for a in 0..32u64 {
            for b in 0..32u64 {
                let mut s = BasisState::zero(c.qubit_count());
                write_register(&mut s, &ra, a);
                write_register(&mut s, &rb, b);
                let out = simulate(&c, &s);
                assert_eq!(out.get(r.qubit(0)), a < b, "a={a} b={b}");
                assert_eq!(read_register(&out, &ra), a);
                assert_eq!(read_register(&out, &rb), b);
            }
        }
    }

    #[test]
    fn signed_comparator_exhaustive_n4() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        let r = c.alloc_qubit("lt").unwrap();
        compare_lt_signed_into(&mut c, ra.qubits(), rb.qubits(), r.qubit(0));
        for a in 0..16u64 {
            for b in 0..16u64 {
                let sa = (a as i64) - if a >= 8 { 16 } else { 0 };
                let sb = (b as i64) - if b >= 8 { 16 } else { 0 };
                let mut s = BasisState::zero(c.qubit_count());
                write_register(&mut s, &ra, a);
                write_register(&mut s, &rb, b);
                let out = simulate(&c, &s);
                assert_eq!(out.get(r.qubit(0)), sa < sb, "a={sa} b={sb}");
                assert_eq!(read_register(&out, &ra), a);
                assert_eq!(read_register(&out, &rb), b);
            }
        }
    }

    #[test]
    fn carry_const_cases() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let r = c.alloc_qubit("cy").unwrap();
        build_carry_const(&mut c, &ra, 4, r.qubit(0)).unwrap();
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 12);
        assert!(simulate(&c, &s).get(r.qubit(0)), "12 + 4 carries out of 4 bits");
        // c = 0 never carries
        let mut c0 = Circuit::new();
        let ra0 = c0.alloc_register(4, "a").unwrap();
        let r0 = c0.alloc_qubit("cy").unwrap();
        build_carry_const(&mut c0, &ra0, 0, r0.qubit(0)).unwrap();
        for a in 0..16u64 {
            let mut s = BasisState::zero(c0.qubit_count());
            write_register(&mut s, &ra0, a);
            assert!(!simulate(&c0, &s).get(r0.qubit(0)));
        }
        assert!(matches!(
            build_carry_const(&mut c, &ra, 16, r.qubit(0)),
            Err(CircuitError::ConstantOutOfRange(16, 4))
        ));
    }

    #[test]
    fn carry_const_exhaustive() {
        for n in [1usize, 2, 3, 6] {
            let lim = 1u64 << n;
            for k in 0..lim {
                let mut c = Circuit::new();
                let ra = c.alloc_register(n, "a").unwrap();
                let r = c.alloc_qubit("cy").unwrap();
                build_carry_const(&mut c, &ra, k, r.qubit(0)).unwrap();
                for a in 0..lim {
                    let mut s = BasisState::zero(c.qubit_count());
                    write_register(&mut s, &ra, a);
                    let out = simulate(&c, &s);
                    assert_eq!(out.get(r.qubit(0)), a + k >= lim, "n={n} a={a} k={k}");
                    assert_eq!(read_register(&out, &ra), a, "input restored");
                    for q in n + 1..c.qubit_count() {
                        assert!(!out.bits()[q], "ancilla {q} not clean");
                    }
                }
            }
        }
    }

    #[test]
    fn ctrl_adder_exhaustive_n4() {
        let mut c = Circuit::new();
        let ctl = c.alloc_qubit("ctl").unwrap();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        build_ctrl_adder(&mut c, ctl.qubit(0), &ra, &rb).unwrap();
        for ctrl in 0..2u64 {
            for a in 0..16u64 {
                for b in 0..16u64 {
                    let mut s = BasisState::zero(c.qubit_count());
                    s.set(ctl.qubit(0), ctrl == 1);
                    write_register(&mut s, &ra, a);
                    write_register(&mut s, &rb, b);
                    let out = simulate(&c, &s);
                    let expect = if ctrl == 1 { (a + b) & 15 } else { b };
                    assert_eq!(read_register(&out, &rb), expect);
                    assert_eq!(read_register(&out, &ra), a);
                    assert_eq!(out.get(ctl.qubit(0)), ctrl == 1);
                }
            }
        }
    }

    #[test]
    fn twos_complement_cases_and_involution_n5() {
        let mut c = Circuit::new();
        let sign = c.alloc_qubit("s").unwrap();
        let rm = c.alloc_register(4, "m").unwrap();
        build_twos_complement(&mut c, sign.qubit(0), &rm);
        // sign = 0 is the identity
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &rm, 11);
        assert_eq!(read_register(&simulate(&c, &s), &rm), 11);
        // sign = 1 negates: 16 - 3 = 13
        let mut s = BasisState::zero(c.qubit_count());
        s.set(sign.qubit(0), true);
        write_register(&mut s, &rm, 3);
        assert_eq!(read_register(&simulate(&c, &s), &rm), 13);

        // involution at n = 5
        let mut c2 = Circuit::new();
        let sign = c2.alloc_qubit("s").unwrap();
        let rm = c2.alloc_register(5, "m").unwrap();
        build_twos_complement(&mut c2, sign.qubit(0), &rm);
        build_twos_complement(&mut c2, sign.qubit(0), &rm);
        for sv in 0..2u64 {
            for m in 0..32u64 {
                let mut s = BasisState::zero(c2.qubit_count());
                s.set(sign.qubit(0), sv == 1);
                write_register(&mut s, &rm, m);
                assert_eq!(read_register(&simulate(&c2, &s), &rm), m);
            }
        }
    }

    #[test]
    fn incrementer_exhaustive_n5() {
        let mut c = Circuit::new();
        let ctl = c.alloc_qubit("c").unwrap();
        let ra = c.alloc_register(5, "a").unwrap();
        // a freed scratch register gives the clean ladder a pool to draw on
        let scratch = c.alloc_register(4, "scratch").unwrap();
        c.free_register(scratch).unwrap();
        build_incrementer(&mut c, ctl.qubit(0), &ra);
        for ctrl in 0..2u64 {
            for a in 0..32u64 {
                let mut s = BasisState::zero(c.qubit_count());
                s.set(ctl.qubit(0), ctrl == 1);
                write_register(&mut s, &ra, a);
                let out = simulate(&c, &s);
                let expect = if ctrl == 1 { (a + 1) & 31 } else { a };
                assert_eq!(read_register(&out, &ra), expect, "ctrl={ctrl} a={a}");
                assert_eq!(out.get(ctl.qubit(0)), ctrl == 1);
            }
        }
        // wraparound: all-ones increments to zero
        let mut s = BasisState::zero(c.qubit_count());
        s.set(ctl.qubit(0), true);
        write_register(&mut s, &ra, 31);
        assert_eq!(read_register(&simulate(&c, &s), &ra), 0);
    }

    #[test]
    fn incrementer_dirty_variant_with_empty_pool() {
        // No pool ancillae: the increment must borrow live spectators.
        let mut c = Circuit::new();
        let ctl = c.alloc_qubit("c").unwrap();
        let ra = c.alloc_register(4, "a").unwrap();
        let spect = c.alloc_register(5, "g").unwrap();
        assert_eq!(c.pool_size(), 0);
        ctrl_increment_into(&mut c, ctl.qubit(0), ra.qubits());
        assert_eq!(c.qubit_count(), 10, "dirty increment must not allocate");
        for ctrl in 0..2u64 {
            for a in 0..16u64 {
                for g in [0u64, 9, 21, 31] {
                    let mut s = BasisState::zero(c.qubit_count());
                    s.set(ctl.qubit(0), ctrl == 1);
                    write_register(&mut s, &ra, a);
                    write_register(&mut s, &spect, g);
                    let out = simulate(&c, &s);
                    let expect = if ctrl == 1 { (a + 1) & 15 } else { a };
                    assert_eq!(read_register(&out, &ra), expect, "ctrl={ctrl} a={a} g={g}");
                    assert_eq!(read_register(&out, &spect), g, "spectators restored");
                    assert_eq!(out.get(ctl.qubit(0)), ctrl == 1, "control restored");
                }
            }
        }
    }

    #[test]
    fn multiplier_cases() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(4, "a").unwrap();
        let rb = c.alloc_register(4, "b").unwrap();
        let ro = c.alloc_register(8, "out").unwrap();
        build_multiplier(&mut c, &ra, &rb, &ro).unwrap();
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 0);
        write_register(&mut s, &rb, 13);
        assert_eq!(read_register(&simulate(&c, &s), &ro), 0);
        let mut s = BasisState::zero(c.qubit_count());
        write_register(&mut s, &ra, 7);
        write_register(&mut s, &rb, 9);
        assert_eq!(read_register(&simulate(&c, &s), &ro), 63);
    }

    #[test]
    fn multiplier_exhaustive_n5_and_commutation() {
        let mut c = Circuit::new();
        let ra = c.alloc_register(5, "a").unwrap();
        let rb = c.alloc_register(5, "b").unwrap();
        let ro = c.alloc_register(10, "out").unwrap();
        build_multiplier(&mut c, &ra, &rb, &ro).unwrap();
        let mut products = std::collections::HashMap::new();
        for a in 0..32u64 {
            for b in 0..32u64 {
                let mut s = BasisState::zero(c.qubit_count());
                write_register(&mut s, &ra, a);
                write_register(&mut s, &rb, b);
                let out = simulate(&c, &s);
                assert_eq!(read_register(&out, &ro), a * b, "a={a} b={b}");
                assert_eq!(read_register(&out, &ra), a);
                assert_eq!(read_register(&out, &rb), b);
                for q in 20..c.qubit_count() {
                    assert!(!out.bits()[q], "work qubit {q} not clean");
                }
                products.insert((a, b), read_register(&out, &ro));
            }
        }
        for a in 0..32u64 {
            for b in 0..32u64 {
                assert_eq!(products[&(a, b)], products[&(b, a)]);
            }
        }
    }
}
