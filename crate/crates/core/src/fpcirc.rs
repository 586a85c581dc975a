//! Floating-point circuit blocks: conditional-swap shifters, first-one
//! position finder, renormalization, and the complete out-of-place adder
//! and multiplier datapaths.
//!
//! Both top-level datapaths follow compute / copy-out / uncompute at block
//! granularity: the result is copied into fresh output registers under
//! case-selection flags, then the entire compute segment is replayed in
//! reverse so the inputs are restored and every work qubit returns to zero.

use crate::arith::{
    add_into, carry_const_into, compare_lt_signed_into, ctrl_increment_into, mul_into,
    negate_if_into, sub_into,
};
use crate::ir::{emit_mcx, Circuit, CircuitError, Control, Qubit, Register};
use crate::sim::BasisState;
use crate::softfloat::{EncodedFp, FpFormat};

/// Shift direction for the conditional-swap shifters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    Left,
    Right,
}

/// The sign, fraction and exponent registers of one encoded operand.
///
/// When the three registers are allocated consecutively on a fresh circuit
/// (exponent first, then fraction, then sign) the operand occupies one
/// contiguous little-endian block whose integer value equals the encoded
/// bit pattern.
#[derive(Debug, Clone)]
pub struct FpRegisters {
    pub exponent: Register,
    pub fraction: Register,
    pub sign: Register,
}

impl FpRegisters {
    pub fn sign_qubit(&self) -> Qubit {
        self.sign.qubit(0)
    }
}

/// Allocate the three registers of an operand in encoding order.
pub fn alloc_fp_operand(
    circuit: &mut Circuit,
    format: &FpFormat,
    prefix: &str,
) -> Result<FpRegisters, CircuitError> {
    let exponent = circuit.alloc_register(format.exponent_bits() as usize, &format!("{prefix}_e"))?;
    let fraction = circuit.alloc_register(format.mantissa_bits() as usize, &format!("{prefix}_f"))?;
    let sign = circuit.alloc_register(1, &format!("{prefix}_s"))?;
    Ok(FpRegisters {
        exponent,
        fraction,
        sign,
    })
}

/// Write an encoded pattern into an operand's registers.
pub fn write_operand(state: &mut BasisState, regs: &FpRegisters, bits: EncodedFp) {
    let e = regs.exponent.width();
    let m = regs.fraction.width();
    for b in 0..e {
        state.set(regs.exponent.qubit(b), bits.0 >> b & 1 == 1);
    }
    for b in 0..m {
        state.set(regs.fraction.qubit(b), bits.0 >> (e + b) & 1 == 1);
    }
    state.set(regs.sign_qubit(), bits.0 >> (e + m) & 1 == 1);
}

/// Read an operand's registers back into an encoded pattern.
pub fn read_operand(state: &BasisState, regs: &FpRegisters) -> EncodedFp {
    let e = regs.exponent.width();
    let m = regs.fraction.width();
    let mut bits = 0u64;
    for b in 0..e {
        if state.get(regs.exponent.qubit(b)) {
            bits |= 1 << b;
        }
    }
    for b in 0..m {
        if state.get(regs.fraction.qubit(b)) {
            bits |= 1 << (e + b);
        }
    }
    if state.get(regs.sign_qubit()) {
        bits |= 1 << (e + m);
    }
    EncodedFp(bits)
}

/// Conditional-swap shifter: `x <- x * 2^s` (left) or `x <- x / 2^s`
/// (right), with the shift amount read from register `s`.
///
/// For every bit k of `s` the data register is swapped by 2^k blocks,
/// conditioned on that bit, so the cost is O(n log n) Fredkin gates rather
/// than the O(n^2) of shifting one position per value.
///
/// The shift must have room: left shifts require the top `s` bits of `x`
/// to be zero and right shifts the bottom `s` bits. Violating this yields
/// well-defined garbage (bits wrap to the far end) but reversibility is
/// always preserved.
pub fn build_shifter(circuit: &mut Circuit, s: &[Qubit], x: &[Qubit], direction: ShiftDirection) {
    let n = x.len();
    for (k, &sk) in s.iter().enumerate() {
        if k >= usize::BITS as usize - 1 {
            break;
        }
        let block = 1usize << k;
        if block >= n {
            break;
        }
        conditional_block_shift(circuit, sk, x, block, direction, 0);
    }
}

/// One conditional shift by `block` positions: a cyclic rotation of the
/// register conditioned on `sk` (the vacated end receives the wrapped-in
/// bits, which the callers' preconditions keep zero).
///
/// When the pool can fan the control across half the register, the
/// rotation is emitted as three conditional reversals, two Fredkin layers
/// deep; otherwise as the serial transposition chain (skipping swaps that
/// sit entirely below `floor`, where no value bit can live while a shift
/// is enabled).
fn conditional_block_shift(
    circuit: &mut Circuit,
    sk: Qubit,
    x: &[Qubit],
    block: usize,
    direction: ShiftDirection,
    floor: usize,
) {
    let n = x.len();
    let fan_need = n / 2 - 1;
    if circuit.pool_size() >= fan_need && n >= 4 {
        let fan = circuit.alloc_register(fan_need.max(1), "rot_fan").unwrap();
        fan_control(circuit, sk, fan.qubits());
        let mut slot = 0usize;
        let mut swap = |circuit: &mut Circuit, a: Qubit, b: Qubit| {
            let ctrl = if slot == 0 { sk } else { fan.qubit(slot - 1) };
            slot = (slot + 1) % (fan.width() + 1);
            circuit.emit_fredkin(ctrl, a, b);
        };
        let mut reverse = |circuit: &mut Circuit, lo: usize, hi: usize| {
            for i in 0..(hi - lo) / 2 {
                swap(circuit, x[lo + i], x[hi - 1 - i]);
            }
        };
        match direction {
            ShiftDirection::Right => {
                // rotate left by `block`: rev[0,b) + rev[b,n), then rev[0,n)
                reverse(circuit, 0, block);
                reverse(circuit, block, n);
                reverse(circuit, 0, n);
            }
            ShiftDirection::Left => {
                reverse(circuit, 0, n);
                reverse(circuit, 0, block);
                reverse(circuit, block, n);
            }
        }
        fan_control(circuit, sk, fan.qubits());
        circuit.free_register(fan).unwrap();
    } else {
        match direction {
            ShiftDirection::Right => {
                for i in floor.saturating_sub(block)..n - block {
                    circuit.emit_fredkin(sk, x[i], x[i + block]);
                }
            }
            ShiftDirection::Left => {
                for i in (floor.saturating_sub(block)..n - block).rev() {
                    circuit.emit_fredkin(sk, x[i], x[i + block]);
                }
            }
        }
    }
}

/// Arithmetic (sign-extending) right shift of a two's-complement register.
///
/// Each conditional block swap is followed by copies of the shifted sign
/// bit into the vacated top positions, so negative values stay negative.
pub fn build_shifter_signed(circuit: &mut Circuit, s: &[Qubit], x: &[Qubit]) {
    shifter_signed_floor(circuit, s, x, 0);
}

/// Signed right shifter for values known to occupy `x[floor..]` whenever a
/// shift is enabled: block swaps entirely below the reachable span act on
/// guaranteed zeros and are dropped.
fn shifter_signed_floor(circuit: &mut Circuit, s: &[Qubit], x: &[Qubit], floor: usize) {
    let n = x.len();
    let mut shifted = 0usize;
    for (k, &sk) in s.iter().enumerate() {
        if k >= usize::BITS as usize - 1 {
            break;
        }
        let block = 1usize << k;
        if block >= n {
            break;
        }
        let bottom = floor.saturating_sub(shifted);
        conditional_block_shift(circuit, sk, x, block, ShiftDirection::Right, bottom);
        // after the block swap the sign sits at n-1-block; the vacated top
        // positions received zeros and take a copy of the sign, fanned over
        // pool zeros so wide fills stay shallow
        let src = x[n - 1 - block];
        let extra = (block - 1).min(circuit.pool_size() / 2);
        if extra >= 1 {
            let fan_s = circuit.alloc_register(extra, "fill_fan").unwrap();
            let fan_src = circuit.alloc_register(extra, "fill_fan").unwrap();
            fan_control(circuit, sk, fan_s.qubits());
            fan_control(circuit, src, fan_src.qubits());
            for (j, target) in (n - block..n).enumerate() {
                let (cs, cv) = if j % (extra + 1) == 0 {
                    (sk, src)
                } else {
                    (fan_s.qubit(j % (extra + 1) - 1), fan_src.qubit(j % (extra + 1) - 1))
                };
                circuit.emit_toffoli(cs, cv, x[target]);
            }
            fan_control(circuit, sk, fan_s.qubits());
            fan_control(circuit, src, fan_src.qubits());
            circuit.free_register(fan_s).unwrap();
            circuit.free_register(fan_src).unwrap();
        } else {
            for j in n - block..n {
                circuit.emit_toffoli(sk, src, x[j]);
            }
        }
        shifted += block;
    }
}

fn code_controls(p: &Register, code: usize) -> Vec<Control> {
    (0..p.width())
        .filter(|b| code >> b & 1 == 1)
        .map(|b| (p.qubit(b), true))
        .collect()
}

/// Count of leading zeros of `x` (zeros above the highest set bit) written
/// into `p`; `f` is flipped to 0 once a set bit is found and stays 1 for
/// `x = 0` (in which case `p` stays 0 too).
///
/// Scans from the top bit down. At step t (code value t, ascending) the
/// position register is set to t if the flag is still up and the scanned
/// bit is 1, then the flag is dropped conditioned on the position register
/// matching t, using only positive controls: with ascending codes a
/// positive-control superset match can only fire on an exact match.
pub fn build_leading_zeros(circuit: &mut Circuit, x: &[Qubit], p: &Register, f: Qubit) {
    let n = x.len();
    assert!(n >= 1);
    assert!(
        p.width() >= usize::BITS as usize - (n - 1).leading_zeros() as usize || n == 1,
        "position register too narrow"
    );
    circuit.emit_x(f);
    for (code, i) in (0..n).rev().enumerate() {
        scan_step_writes(circuit, f, x[i], p, code);
        let mut ctrls = code_controls(p, code);
        ctrls.push((x[i], true));
        emit_mcx(circuit, &ctrls, f);
    }
}

/// The per-step position writes of a leading-one scan: `p ^= code` when the
/// flag is up and the scanned bit set. The shared controls fan over pool
/// zeros when available so multi-bit codes write in one Toffoli layer.
fn scan_step_writes(circuit: &mut Circuit, f: Qubit, xi: Qubit, p: &Register, code: usize) {
    let set_bits: Vec<usize> = (0..p.width()).filter(|b| code >> b & 1 == 1).collect();
    let extra = set_bits.len().saturating_sub(1);
    if extra >= 1 && circuit.pool_size() >= 2 * extra {
        let fan_f = circuit.alloc_register(extra, "scan_fan").unwrap();
        let fan_x = circuit.alloc_register(extra, "scan_fan").unwrap();
        fan_control(circuit, f, fan_f.qubits());
        fan_control(circuit, xi, fan_x.qubits());
        for (j, &b) in set_bits.iter().enumerate() {
            let (cf, cx) = if j == 0 {
                (f, xi)
            } else {
                (fan_f.qubit(j - 1), fan_x.qubit(j - 1))
            };
            circuit.emit_toffoli(cf, cx, p.qubit(b));
        }
        fan_control(circuit, f, fan_f.qubits());
        fan_control(circuit, xi, fan_x.qubits());
        circuit.free_register(fan_f).unwrap();
        circuit.free_register(fan_x).unwrap();
    } else {
        for &b in &set_bits {
            circuit.emit_toffoli(f, xi, p.qubit(b));
        }
    }
}

/// Position of the highest set bit: `p <- floor(log2 x)` for `x > 0`, with
/// the flag `f` ending at 0; for `x = 0`, `p = 0` and `f = 1`.
///
/// Built from the leading-zero scan over a power-of-two window (padding
/// positions above `x` are skipped since they can never be set), followed
/// by a complement of the position register conditioned on the found flag.
pub fn build_first_one(circuit: &mut Circuit, x: &[Qubit], p: &Register, f: Qubit) {
    let n = x.len();
    assert!(n >= 1);
    let t = p.width();
    let window = 1usize << t;
    assert!(window >= n, "position register too narrow for {n} data bits");
    circuit.emit_x(f);
    for i in (0..n).rev() {
        let code = window - 1 - i;
        for b in 0..t {
            if code >> b & 1 == 1 {
                circuit.emit_toffoli(f, x[i], p.qubit(b));
            }
        }
        let mut ctrls = code_controls(p, code);
        ctrls.push((x[i], true));
        emit_mcx(circuit, &ctrls, f);
    }
    // p holds (window-1) - position; complement it when a one was found
    circuit.emit_x(f);
    for b in 0..t {
        circuit.emit_cnot(f, p.qubit(b));
    }
    circuit.emit_x(f);
}

/// Work registers produced by [`build_renormalize`]; the caller uncomputes
/// them by replaying the enclosing compute segment and then frees them.
pub struct RenormWork {
    /// Left-shift amount applied to the mantissa window.
    pub shift: Register,
    /// Set when the mantissa window was entirely zero (no leading one).
    pub zero_flag: Register,
}

/// Renormalization: left-shift `mant` so its leading one reaches the top
/// position, and subtract the shift amount from the signed exponent
/// accumulator `exp`.
///
/// A zero mantissa shifts by 0 and raises the zero flag; downstream
/// copy-out logic uses the flag to emit a zero encoding instead.
pub fn build_renormalize(circuit: &mut Circuit, mant: &[Qubit], exp: &[Qubit]) -> RenormWork {
    let n = mant.len();
    let t = (usize::BITS - (n - 1).leading_zeros()).max(1) as usize;
    assert!(exp.len() >= t, "exponent accumulator narrower than the shift");
    let shift = circuit.alloc_register(t, "rn_shift").unwrap();
    let zero_flag = circuit.alloc_qubit("rn_zero").unwrap();
    build_leading_zeros(circuit, mant, &shift, zero_flag.qubit(0));
    build_shifter(circuit, shift.qubits(), mant, ShiftDirection::Left);
    // exp -= shift (zero-extended)
    let pad = circuit.alloc_register(exp.len() - t, "rn_pad").unwrap();
    let mut wide = shift.qubits().to_vec();
    wide.extend_from_slice(pad.qubits());
    sub_into(circuit, &wide, exp);
    circuit.free_register(pad).unwrap();
    RenormWork { shift, zero_flag }
}

/// Positive controls matching the most negative exponent field (the zero
/// row): top bit set, all others clear.
fn zero_row_controls(exponent: &Register) -> Vec<Control> {
    let e = exponent.width();
    (0..e).map(|b| (exponent.qubit(b), b == e - 1)).collect()
}

/// Controls matching the most positive exponent field (the infinity row):
/// top bit clear, all others set.
fn inf_row_controls(exponent: &Register) -> Vec<Control> {
    let e = exponent.width();
    (0..e).map(|b| (exponent.qubit(b), b != e - 1)).collect()
}

/// Two's-complement register width covering `[lo, hi]`.
fn signed_width(lo: i64, hi: i64) -> usize {
    let mut w = 2;
    while -(1i64 << (w - 1)) > lo || (1i64 << (w - 1)) - 1 < hi {
        w += 1;
    }
    w
}

/// Flip `flag` iff the signed value in `er` is `< bound` (`u`) or
/// `>= bound` (`o`), under optional extra positive controls.
fn flag_signed_cmp_const(
    circuit: &mut Circuit,
    er: &[Qubit],
    bound: i64,
    less_than: bool,
    flag: Qubit,
    extra: &[Control],
) {
    let w = er.len();
    let top = er[w - 1];
    // flipping the top bit biases two's complement onto unsigned order
    let biased = (bound + (1i64 << (w - 1))) as u64;
    circuit.emit_x(top);
    // carry(er_b + 2^w - biased) = [er_b >= biased]
    carry_const_into(circuit, er, (1u64 << w) - biased, flag, extra);
    circuit.emit_x(top);
    if less_than {
        if extra.is_empty() {
            circuit.emit_x(flag);
        } else {
            emit_mcx(circuit, extra, flag);
        }
    }
}

/// The six registers of a binary floating-point operation, plus the
/// circuit that computes it.
pub struct FpBinaryCircuit {
    pub circuit: Circuit,
    pub format: FpFormat,
    pub x: FpRegisters,
    pub y: FpRegisters,
    pub out: FpRegisters,
}

impl FpBinaryCircuit {
    /// Simulate on a pair of encoded operands, returning the encoded
    /// result. Also checks that the inputs are restored.
    pub fn run(&self, a: EncodedFp, b: EncodedFp) -> EncodedFp {
        let mut state = BasisState::zero(self.circuit.qubit_count());
        write_operand(&mut state, &self.x, a);
        write_operand(&mut state, &self.y, b);
        crate::sim::simulate_in_place(&self.circuit, &mut state);
        read_operand(&state, &self.out)
    }

    /// Simulate and additionally verify that inputs are restored and every
    /// non-output work qubit ends at zero.
    pub fn run_checked(&self, a: EncodedFp, b: EncodedFp) -> Result<EncodedFp, String> {
        let mut state = BasisState::zero(self.circuit.qubit_count());
        write_operand(&mut state, &self.x, a);
        write_operand(&mut state, &self.y, b);
        crate::sim::simulate_in_place(&self.circuit, &mut state);
        if read_operand(&state, &self.x) != a || read_operand(&state, &self.y) != b {
            return Err(format!("inputs not restored for a={:#x} b={:#x}", a.0, b.0));
        }
        let w = self.format.width() as usize;
        let mut io = vec![false; self.circuit.qubit_count()];
        for regs in [&self.x, &self.y, &self.out] {
            for q in regs
                .exponent
                .qubits()
                .iter()
                .chain(regs.fraction.qubits())
                .chain(regs.sign.qubits())
            {
                io[q.index()] = true;
            }
        }
        debug_assert_eq!(io.iter().filter(|&&b| b).count(), 3 * w);
        for (i, bit) in state.bits().iter().enumerate() {
            if !io[i] && *bit {
                return Err(format!(
                    "work qubit {i} not restored to zero for a={:#x} b={:#x}",
                    a.0, b.0
                ));
            }
        }
        Ok(read_operand(&state, &self.out))
    }
}

/// Build a complete floating-point adder over fresh registers.
pub fn build_fp_adder_circuit(format: &FpFormat) -> FpBinaryCircuit {
    let mut circuit = Circuit::new();
    let x = alloc_fp_operand(&mut circuit, format, "x").unwrap();
    let y = alloc_fp_operand(&mut circuit, format, "y").unwrap();
    let out = alloc_fp_operand(&mut circuit, format, "out").unwrap();
    build_fp_adder(&mut circuit, format, &x, &y, &out).unwrap();
    FpBinaryCircuit {
        circuit,
        format: *format,
        x,
        y,
        out,
    }
}

/// Build a complete floating-point multiplier over fresh registers.
pub fn build_fp_multiplier_circuit(format: &FpFormat) -> FpBinaryCircuit {
    let mut circuit = Circuit::new();
    let x = alloc_fp_operand(&mut circuit, format, "x").unwrap();
    let y = alloc_fp_operand(&mut circuit, format, "y").unwrap();
    let out = alloc_fp_operand(&mut circuit, format, "out").unwrap();
    build_fp_multiplier(&mut circuit, format, &x, &y, &out).unwrap();
    FpBinaryCircuit {
        circuit,
        format: *format,
        x,
        y,
        out,
    }
}

/// Out-of-place floating-point addition: `out <- x + y` with truncation
/// toward zero, bit-exact against [`crate::softfloat::add`]. The output
/// registers must start at zero; inputs and all work qubits are restored.
///
/// Pipeline: sort operands by exponent (signed compare, controlled swap),
/// derive the special-case flags, align the smaller mantissa with a signed
/// conditional-swap shifter over a 2M-bit working frame, add the larger
/// mantissa in place, convert back from two's complement, renormalize with
/// the leading-one scan, range-check the exponent, copy out, uncompute.
pub fn build_fp_adder(
    circuit: &mut Circuit,
    format: &FpFormat,
    x: &FpRegisters,
    y: &FpRegisters,
    out: &FpRegisters,
) -> Result<(), CircuitError> {
    let e = format.exponent_bits() as usize;
    let m = format.mantissa_bits() as usize;
    check_operand(format, x)?;
    check_operand(format, y)?;
    check_operand(format, out)?;

    let start = circuit.gate_count();

    // Working registers allocated up front: their qubits double as fan-out
    // targets for control-heavy stages while they are still zero. The
    // frame is guard [0..M) | y fraction [M..2M) | implicit [2M] |
    // ovf [2M+1] | sign [2M+2], with the y fraction qubits used in place.
    let guard = circuit.alloc_register(m, "guard")?;
    let imp_y = circuit.alloc_qubit("imp_y")?;
    let ovf = circuit.alloc_qubit("ovf")?;
    let fsign = circuit.alloc_qubit("fsign")?;
    let mut frame: Vec<Qubit> = guard.qubits().to_vec();
    frame.extend_from_slice(y.fraction.qubits());
    frame.push(imp_y.qubit(0));
    frame.push(ovf.qubit(0));
    frame.push(fsign.qubit(0));
    let w = frame.len(); // 2M + 3
    // The exponent accumulates biased by -NMIN, so underflow is simply the
    // accumulator's sign bit and the in-range values sit in [0, 2^E - 1].
    // The true field bits differ from the biased ones only in bit E-1.
    let we = signed_width(-(m as i64) - 2, (1i64 << e) - 1);
    let er = circuit.alloc_register(we, "exp_acc")?;

    // Prime the ancilla pool so the early comparison ladders draw reused
    // qubits instead of growing the circuit; the peak later in the
    // pipeline dominates the total either way.
    let reserve = circuit.alloc_register(e + we + 2, "reserve")?;
    circuit.free_register(reserve)?;

    // -- operand sort ----------------------------------------------------
    // the swap flag fans over the still-zero work registers so the operand
    // swap costs one Fredkin layer instead of a serial chain
    let cmp = circuit.alloc_qubit("swap")?;
    let c = cmp.qubit(0);
    compare_lt_signed_into(circuit, x.exponent.qubits(), y.exponent.qubits(), c);
    let mut work_zeros: Vec<Qubit> = guard.qubits().to_vec();
    work_zeros.push(imp_y.qubit(0));
    work_zeros.push(ovf.qubit(0));
    work_zeros.push(fsign.qubit(0));
    work_zeros.extend_from_slice(er.qubits());
    let swap_fan = &work_zeros[..(e + m).min(work_zeros.len())];
    fan_control(circuit, c, swap_fan);
    for (i, (xq, yq)) in operand_qubits(x).zip(operand_qubits(y)).enumerate() {
        let ctrl = if i == 0 { c } else { swap_fan[(i - 1) % swap_fan.len()] };
        circuit.emit_fredkin(ctrl, xq, yq);
    }
    fan_control(circuit, c, swap_fan);

    // -- infinity flags (post-sort an infinite operand is always on the
    //    x side, since nothing sorts above the top exponent row) ---------
    let i_any = circuit.alloc_qubit("inf_any")?;
    emit_mcx(circuit, &inf_row_controls(&x.exponent), i_any.qubit(0));
    // a y-side infinity implies an x-side one after the sort, so this flag
    // alone identifies "both infinite"
    let i_both = circuit.alloc_qubit("inf_both")?;
    emit_mcx(circuit, &inf_row_controls(&y.exponent), i_both.qubit(0));

    // -- exponent difference, alignment controls -------------------------
    let dx = circuit.alloc_register(e + 1, "delta")?;
    let py = circuit.alloc_qubit("delta_pad")?;
    let delta_start = circuit.gate_count();
    for b in 0..e {
        circuit.emit_cnot(x.exponent.qubit(b), dx.qubit(b));
    }
    circuit.emit_cnot(x.exponent.qubit(e - 1), dx.qubit(e));
    circuit.emit_cnot(y.exponent.qubit(e - 1), py.qubit(0));
    let mut y_ext = y.exponent.qubits().to_vec();
    y_ext.push(py.qubit(0));
    sub_into(circuit, &y_ext, dx.qubits());
    let delta_end = circuit.gate_count();

    // alignment is skipped when delta > M ("big" difference)
    let big = circuit.alloc_qubit("big_delta")?;
    carry_const_into(
        circuit,
        dx.qubits(),
        (1u64 << (e + 1)) - (m as u64 + 1),
        big.qubit(0),
        &[],
    );

    // implicit-one of y, doubling as the alignment enable: set unless the
    // difference is out of range or y sits on the zero row
    circuit.emit_x(imp_y.qubit(0));
    circuit.emit_cnot(big.qubit(0), imp_y.qubit(0));
    let mut zy_ctrls = zero_row_controls(&y.exponent);
    zy_ctrls.push((big.qubit(0), false));
    emit_mcx(circuit, &zy_ctrls, imp_y.qubit(0));

    // masked shift amount: the low bits of delta, zeroed when suppressed
    let t_shift = signed_width(0, m as i64) - 1; // bits to hold 0..=M
    let s = circuit.alloc_register(t_shift, "shift")?;
    for b in 0..t_shift.min(e + 1) {
        circuit.emit_toffoli(imp_y.qubit(0), dx.qubit(b), s.qubit(b));
    }

    // the difference register is no longer needed; rewind its computation
    circuit.uncompute_range(delta_start, delta_end);
    circuit.free_register(dx)?;
    circuit.free_register(py)?;

    // park the y fraction in the guard when its contribution is suppressed;
    // the dressed enable fans over the still-zero exponent accumulator
    circuit.emit_x(imp_y.qubit(0));
    let park_fan = &er.qubits()[..we.min(m.saturating_sub(1))];
    fan_control(circuit, imp_y.qubit(0), park_fan);
    for b in 0..m {
        let ctrl = if b == 0 || park_fan.is_empty() {
            imp_y.qubit(0)
        } else {
            park_fan[(b - 1) % park_fan.len()]
        };
        circuit.emit_fredkin(ctrl, y.fraction.qubit(b), guard.qubit(b));
    }
    fan_control(circuit, imp_y.qubit(0), park_fan);
    circuit.emit_x(imp_y.qubit(0));

    // implicit-one of x: set unless x sits on the zero row
    let imp_x = circuit.alloc_qubit("imp_x")?;
    circuit.emit_x(imp_x.qubit(0));
    emit_mcx(circuit, &zero_row_controls(&x.exponent), imp_x.qubit(0));

    // -- two's complement of y by the relative sign, then alignment ------
    // y.sign temporarily holds x_S xor y_S; the mirror restores it
    circuit.emit_cnot(x.sign_qubit(), y.sign_qubit());
    negate_if_into(circuit, y.sign_qubit(), &frame[m..]);
    // whenever a shift fires the guard below bit M is clear (a suppressed
    // contribution parks with a zero shift amount)
    shifter_signed_floor(circuit, s.qubits(), &frame, m);

    // -- mantissa addition over the top window ---------------------------
    let pads = circuit.alloc_register(2, "sum_pad")?;
    let mut x_addend: Vec<Qubit> = x.fraction.qubits().to_vec();
    x_addend.push(imp_x.qubit(0));
    x_addend.push(pads.qubit(0));
    x_addend.push(pads.qubit(1));
    add_into(circuit, &x_addend, &frame[m..]);
    circuit.free_register(pads)?;

    // -- back to sign and magnitude --------------------------------------
    // a negative sum implies equal exponents, so the guard is empty and
    // negating the window above it is exact
    negate_if_into(circuit, fsign.qubit(0), &frame[m..w - 1]);
    // fold in x's sign: fsign now holds the result sign
    circuit.emit_cnot(x.sign_qubit(), fsign.qubit(0));

    // -- exponent accumulator: er = (x_E - NMIN) + 1 - shift -------------
    // the bias constant 1 - NMIN is a power of two: one X gate
    circuit.emit_x(er.qubit(e - 1));
    let exw = circuit.alloc_register(we, "exp_ext")?;
    let copy_start = circuit.gate_count();
    for b in 0..e {
        circuit.emit_cnot(x.exponent.qubit(b), exw.qubit(b));
    }
    for b in e..we {
        circuit.emit_cnot(x.exponent.qubit(e - 1), exw.qubit(b));
    }
    let copy_end = circuit.gate_count();
    add_into(circuit, exw.qubits(), er.qubits());
    circuit.uncompute_range(copy_start, copy_end);
    circuit.free_register(exw)?;

    // -- renormalize: the scan window never extends below bit M-1 --------
    let rn = build_renormalize(circuit, &frame[m - 1..w - 1], er.qubits());

    // -- output classification -------------------------------------------
    // infinity: an infinite input, or an in-band overflow; with the biased
    // accumulator, er >= EMAX means bits 1..E all set and the sign clear
    let f_inf = circuit.alloc_qubit("f_inf")?;
    circuit.emit_cnot(i_any.qubit(0), f_inf.qubit(0));
    let mut over_ctrls: Vec<Control> = (1..e).map(|b| (er.qubit(b), true)).collect();
    over_ctrls.push((er.qubit(we - 1), false));
    over_ctrls.push((i_any.qubit(0), false));
    over_ctrls.push((rn.zero_flag.qubit(0), false));
    emit_mcx(circuit, &over_ctrls, f_inf.qubit(0));
    // zero: a vanished mantissa, or exponent underflow (biased sign bit)
    let f_zero = circuit.alloc_qubit("f_zero")?;
    emit_mcx(
        circuit,
        &[(f_inf.qubit(0), false), (rn.zero_flag.qubit(0), true)],
        f_zero.qubit(0),
    );
    emit_mcx(
        circuit,
        &[
            (f_inf.qubit(0), false),
            (rn.zero_flag.qubit(0), false),
            (er.qubit(we - 1), true),
        ],
        f_zero.qubit(0),
    );
    let f_norm = circuit.alloc_qubit("f_norm")?;
    emit_mcx(
        circuit,
        &[(f_inf.qubit(0), false), (f_zero.qubit(0), false)],
        f_norm.qubit(0),
    );

    // -- copy-out (excluded from the mirror) ------------------------------
    let copy_out = circuit.gate_count();
    // the qubit-disjoint writes below share one selection flag; fan it
    // over whatever the pool can spare to flatten the write depth
    let fan_width = circuit.pool_size().min(m + e - 1);
    let norm_fan = if fan_width > 0 {
        Some(circuit.alloc_register(fan_width, "copy_fan")?)
    } else {
        None
    };
    let fan_qubits: Vec<Qubit> = norm_fan
        .iter()
        .flat_map(|r| r.qubits().iter().copied())
        .collect();
    let norm_ctrl = |i: usize| {
        if i % (fan_width + 1) == 0 {
            f_norm.qubit(0)
        } else {
            fan_qubits[i % (fan_width + 1) - 1]
        }
    };
    fan_control(circuit, f_norm.qubit(0), &fan_qubits);
    // exponent: infinity row 011..1, zero row 100..0, else the accumulator;
    // the true field is the biased value with the top field bit flipped,
    // plus one (applied below once the copies are done)
    for b in 0..e - 1 {
        circuit.emit_cnot(f_inf.qubit(0), out.exponent.qubit(b));
    }
    circuit.emit_cnot(f_zero.qubit(0), out.exponent.qubit(e - 1));
    circuit.emit_x(er.qubit(e - 1));
    for b in 0..e {
        circuit.emit_toffoli(norm_ctrl(b), er.qubit(b), out.exponent.qubit(b));
    }
    circuit.emit_x(er.qubit(e - 1));
    // fraction sits just below the normalized leading one
    for b in 0..m {
        circuit.emit_toffoli(norm_ctrl(e + b), frame[m + 1 + b], out.fraction.qubit(b));
    }
    fan_control(circuit, f_norm.qubit(0), &fan_qubits);
    if let Some(reg) = norm_fan {
        circuit.free_register(reg)?;
    }
    // the +1 completing the unbiasing of a normal exponent
    ctrl_increment_into(circuit, f_norm.qubit(0), out.exponent.qubits());
    // sign: restore y.sign for the duration of the sign writes
    circuit.emit_cnot(x.sign_qubit(), y.sign_qubit());
    emit_mcx(
        circuit,
        &[
            (f_inf.qubit(0), true),
            (i_any.qubit(0), true),
            (i_both.qubit(0), false),
            (x.sign_qubit(), true),
        ],
        out.sign_qubit(),
    );
    emit_mcx(
        circuit,
        &[
            (f_inf.qubit(0), true),
            (i_both.qubit(0), true),
            (x.sign_qubit(), true),
            (y.sign_qubit(), true),
        ],
        out.sign_qubit(),
    );
    emit_mcx(
        circuit,
        &[
            (f_inf.qubit(0), true),
            (i_any.qubit(0), false),
            (fsign.qubit(0), true),
        ],
        out.sign_qubit(),
    );
    emit_mcx(
        circuit,
        &[(f_norm.qubit(0), true), (fsign.qubit(0), true)],
        out.sign_qubit(),
    );
    circuit.emit_cnot(x.sign_qubit(), y.sign_qubit());

    // -- uncompute everything but the copy-out ----------------------------
    circuit.uncompute_range(start, copy_out);

    for reg in [
        cmp, i_any, i_both, big, imp_y, ovf, fsign, imp_x, f_inf, f_zero, f_norm,
    ] {
        circuit.free_register(reg)?;
    }
    for reg in [guard, s, er, rn.shift, rn.zero_flag] {
        circuit.free_register(reg)?;
    }
    Ok(())
}

/// CNOT-copy a control onto known-zero qubits (and back, when called a
/// second time) so fans of controlled gates can spread across layers.
fn fan_control(circuit: &mut Circuit, control: Qubit, zeros: &[Qubit]) {
    for &z in zeros {
        circuit.emit_cnot(control, z);
    }
}

/// Out-of-place floating-point multiplication: `out <- x * y` with
/// truncation toward zero, bit-exact against [`crate::softfloat::mul`].
/// Output registers must start at zero; inputs and work qubits restored.
///
/// The mantissas (implicit ones included) are multiplied into a fresh
/// double-width register; a set top product bit right-shifts the selection
/// window by one and increments the exponent; the input exponents are added
/// when the operands are nonzero, range-checked, and the result is copied
/// out with zero and infinity casing.
pub fn build_fp_multiplier(
    circuit: &mut Circuit,
    format: &FpFormat,
    x: &FpRegisters,
    y: &FpRegisters,
    out: &FpRegisters,
) -> Result<(), CircuitError> {
    let e = format.exponent_bits() as usize;
    let m = format.mantissa_bits() as usize;
    check_operand(format, x)?;
    check_operand(format, y)?;
    check_operand(format, out)?;

    let start = circuit.gate_count();

    // prime the ancilla pool so flag ladders reuse qubits instead of
    // growing the circuit at low-water moments
    let we = signed_width(2 * format.emin(), 2 * format.emax() + 1);
    let reserve = circuit.alloc_register(e + we + 2, "reserve")?;
    circuit.free_register(reserve)?;

    // input-row flags, one per operand and row
    let ix = circuit.alloc_qubit("inf_x")?;
    emit_mcx(circuit, &inf_row_controls(&x.exponent), ix.qubit(0));
    let iy = circuit.alloc_qubit("inf_y")?;
    emit_mcx(circuit, &inf_row_controls(&y.exponent), iy.qubit(0));
    let zx = circuit.alloc_qubit("zero_x")?;
    emit_mcx(circuit, &zero_row_controls(&x.exponent), zx.qubit(0));
    let zy = circuit.alloc_qubit("zero_y")?;
    emit_mcx(circuit, &zero_row_controls(&y.exponent), zy.qubit(0));
    // nz = neither operand on the zero row
    let nz = circuit.alloc_qubit("nonzero")?;
    emit_mcx(
        circuit,
        &[(zx.qubit(0), false), (zy.qubit(0), false)],
        nz.qubit(0),
    );

    // mantissas with explicit implicit ones; a zero operand leaves garbage
    // in the product, which the zero flag overrides at copy-out
    let imp_x = circuit.alloc_qubit("imp_x")?;
    circuit.emit_x(imp_x.qubit(0));
    let imp_y = circuit.alloc_qubit("imp_y")?;
    circuit.emit_x(imp_y.qubit(0));
    let mut xmant: Vec<Qubit> = x.fraction.qubits().to_vec();
    xmant.push(imp_x.qubit(0));
    let mut ymant: Vec<Qubit> = y.fraction.qubits().to_vec();
    ymant.push(imp_y.qubit(0));

    // full double-width product; on overflow the whole register is
    // right-shifted by one so the normalized window sits at a fixed place
    let product = circuit.alloc_register(2 * m + 2, "product")?;
    mul_into(circuit, &xmant, &ymant, product.qubits());
    let ovf = circuit.alloc_qubit("ovf")?;
    circuit.emit_cnot(product.qubit(2 * m + 1), ovf.qubit(0));
    for i in 0..2 * m + 1 {
        circuit.emit_fredkin(ovf.qubit(0), product.qubit(i), product.qubit(i + 1));
    }

    // exponent sum (only when both operands are nonzero) plus the overflow
    // correction
    let er = circuit.alloc_register(we, "exp_acc")?;
    for b in 0..e {
        circuit.emit_toffoli(nz.qubit(0), x.exponent.qubit(b), er.qubit(b));
    }
    for b in e..we {
        circuit.emit_toffoli(nz.qubit(0), x.exponent.qubit(e - 1), er.qubit(b));
    }
    let masked = circuit.alloc_register(we, "exp_ext")?;
    let mask_start = circuit.gate_count();
    for b in 0..e {
        circuit.emit_toffoli(nz.qubit(0), y.exponent.qubit(b), masked.qubit(b));
    }
    for b in e..we {
        circuit.emit_toffoli(nz.qubit(0), y.exponent.qubit(e - 1), masked.qubit(b));
    }
    let mask_end = circuit.gate_count();
    add_into(circuit, masked.qubits(), er.qubits());
    circuit.uncompute_range(mask_start, mask_end);
    circuit.free_register(masked)?;
    ctrl_increment_into(circuit, ovf.qubit(0), er.qubits());

    // classification; the range checks are gated on nz so that the idle
    // accumulator of a zero operand can never masquerade as out-of-range
    let f_inf = circuit.alloc_qubit("f_inf")?;
    circuit.emit_cnot(ix.qubit(0), f_inf.qubit(0));
    emit_mcx(
        circuit,
        &[(iy.qubit(0), true), (ix.qubit(0), false)],
        f_inf.qubit(0),
    );
    flag_signed_cmp_const(
        circuit,
        er.qubits(),
        format.emax(),
        false,
        f_inf.qubit(0),
        &[(ix.qubit(0), false), (iy.qubit(0), false), (nz.qubit(0), true)],
    );
    let f_zero = circuit.alloc_qubit("f_zero")?;
    emit_mcx(
        circuit,
        &[(f_inf.qubit(0), false), (nz.qubit(0), false)],
        f_zero.qubit(0),
    );
    flag_signed_cmp_const(
        circuit,
        er.qubits(),
        format.normal_min(),
        true,
        f_zero.qubit(0),
        &[(f_inf.qubit(0), false), (nz.qubit(0), true)],
    );
    let f_norm = circuit.alloc_qubit("f_norm")?;
    emit_mcx(
        circuit,
        &[(f_inf.qubit(0), false), (f_zero.qubit(0), false)],
        f_norm.qubit(0),
    );

    // result sign: xor of the effective signs, where a zero-row operand's
    // sign normalizes away (its decoded value is the canonical +0)
    let sign_xor = circuit.alloc_qubit("sign_xor")?;
    circuit.emit_cnot(x.sign_qubit(), sign_xor.qubit(0));
    circuit.emit_toffoli(zx.qubit(0), x.sign_qubit(), sign_xor.qubit(0));
    circuit.emit_cnot(y.sign_qubit(), sign_xor.qubit(0));
    circuit.emit_toffoli(zy.qubit(0), y.sign_qubit(), sign_xor.qubit(0));

    // -- copy-out ----------------------------------------------------------
    let copy_out = circuit.gate_count();
    for b in 0..e - 1 {
        circuit.emit_cnot(f_inf.qubit(0), out.exponent.qubit(b));
    }
    circuit.emit_cnot(f_zero.qubit(0), out.exponent.qubit(e - 1));
    for b in 0..e {
        circuit.emit_toffoli(f_norm.qubit(0), er.qubit(b), out.exponent.qubit(b));
    }
    // the normalized fraction sits at a fixed window after the conditional
    // overflow shift
    for b in 0..m {
        circuit.emit_toffoli(f_norm.qubit(0), product.qubit(m + b), out.fraction.qubit(b));
    }
    // sign for every non-zero outcome
    circuit.emit_toffoli(f_inf.qubit(0), sign_xor.qubit(0), out.sign_qubit());
    circuit.emit_toffoli(f_norm.qubit(0), sign_xor.qubit(0), out.sign_qubit());

    circuit.uncompute_range(start, copy_out);

    for reg in [
        ix, iy, zx, zy, nz, imp_x, imp_y, ovf, f_inf, f_zero, f_norm, sign_xor,
    ] {
        circuit.free_register(reg)?;
    }
    circuit.free_register(product)?;
    circuit.free_register(er)?;
    Ok(())
}

fn operand_qubits<'a>(regs: &'a FpRegisters) -> impl Iterator<Item = Qubit> + 'a {
    regs.exponent
        .qubits()
        .iter()
        .chain(regs.fraction.qubits())
        .chain(regs.sign.qubits())
        .copied()
}

fn check_operand(format: &FpFormat, regs: &FpRegisters) -> Result<(), CircuitError> {
    if regs.exponent.width() != format.exponent_bits() as usize {
        return Err(CircuitError::WidthMismatch(
            regs.exponent.width(),
            format.exponent_bits() as usize,
        ));
    }
    if regs.fraction.width() != format.mantissa_bits() as usize {
        return Err(CircuitError::WidthMismatch(
            regs.fraction.width(),
            format.mantissa_bits() as usize,
        ));
    }
    if regs.sign.width() != 1 {
        return Err(CircuitError::WidthMismatch(regs.sign.width(), 1));
    }
    Ok(())
}
