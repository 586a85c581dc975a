//! Clifford+T cost accounting.
//!
//! Toffoli and Fredkin gates are the only T-cost carriers: each Toffoli is
//! decomposed with 7 T gates in T-depth 3, and a Fredkin lowers to
//! CNOT-Toffoli-CNOT, so it costs exactly one Toffoli. X and CNOT are
//! Clifford and free. T-depth is 3x the Toffoli-layer depth obtained by
//! greedy as-soon-as-possible layering on qubit disjointness; Clifford
//! gates are transparent to the layering. These conventions give upper
//! bounds, not rescheduled optima.

use crate::ir::{Circuit, Gate};

/// T gates per Toffoli-equivalent under the fixed decomposition.
pub const T_PER_TOFFOLI: u64 = 7;
/// T-depth contributed by one Toffoli layer.
pub const T_DEPTH_PER_LAYER: u64 = 3;
/// Largest number of simultaneous T gates inside one Toffoli decomposition.
pub const PARALLEL_T_PER_TOFFOLI: u64 = 3;

/// Fault-tolerance cost figures for one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceReport {
    pub qubits: u64,
    pub toffoli_count: u64,
    pub fredkin_count: u64,
    pub t_count: u64,
    pub t_depth: u64,
    pub parallel_t_max: u64,
    pub kq: u64,
}

/// Qubit-disjoint layering of the Toffoli-equivalent gates (indices into
/// the circuit's gate list). Exposed for the layering validity checks.
pub fn toffoli_layers(circuit: &Circuit) -> Vec<Vec<usize>> {
    let mut last_layer = vec![0usize; circuit.qubit_count()];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for (i, gate) in circuit.gates().iter().enumerate() {
        if !matches!(gate, Gate::Toffoli { .. } | Gate::Fredkin { .. }) {
            continue;
        }
        let layer = gate
            .qubits()
            .map(|q| last_layer[q.index()])
            .max()
            .unwrap_or(0)
            + 1;
        for q in gate.qubits() {
            last_layer[q.index()] = layer;
        }
        if layers.len() < layer {
            layers.resize_with(layer, Vec::new);
        }
        layers[layer - 1].push(i);
    }
    layers
}

/// Count qubits, Toffoli/Fredkin totals and the derived Clifford+T figures.
pub fn count_resources(circuit: &Circuit) -> ResourceReport {
    let mut toffoli_count = 0u64;
    let mut fredkin_count = 0u64;
    for gate in circuit.gates() {
        match gate {
            Gate::Toffoli { .. } => toffoli_count += 1,
            Gate::Fredkin { .. } => fredkin_count += 1,
            _ => {}
        }
    }
    let layers = toffoli_layers(circuit);
    let widest = layers.iter().map(Vec::len).max().unwrap_or(0) as u64;
    let qubits = circuit.qubit_count() as u64;
    let t_count = T_PER_TOFFOLI * (toffoli_count + fredkin_count);
    let t_depth = T_DEPTH_PER_LAYER * layers.len() as u64;
    ResourceReport {
        qubits,
        toffoli_count,
        fredkin_count,
        t_count,
        t_depth,
        parallel_t_max: PARALLEL_T_PER_TOFFOLI * widest,
        kq: t_depth * qubits,
    }
}

/// KQ: T-depth times qubit count.
pub fn compute_kq(report: &ResourceReport) -> u64 {
    report.t_depth * report.qubits
}

/// One row of the published resource counts for the hand-optimized
/// designs, used as the reference column when reproducing them.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceRow {
    pub design: &'static str,
    pub width: u32,
    pub exponent_bits: u32,
    pub mantissa_bits: u32,
    pub qubits: u64,
    pub t_count: u64,
    pub t_depth: u64,
}

/// Published counts for the six hand-optimized designs (each Toffoli
/// decomposed with 7 T gates in T-depth 3). Widths map onto formats as
/// 16 -> e8m7, 32 -> e8m23, 64 -> e11m52.
pub const REFERENCE_COUNTS: [ReferenceRow; 6] = [
    ReferenceRow { design: "adder", width: 16, exponent_bits: 8, mantissa_bits: 7, qubits: 76, t_count: 4_704, t_depth: 1_386 },
    ReferenceRow { design: "adder", width: 32, exponent_bits: 8, mantissa_bits: 23, qubits: 140, t_count: 11_144, t_depth: 3_138 },
    ReferenceRow { design: "adder", width: 64, exponent_bits: 11, mantissa_bits: 52, qubits: 268, t_count: 26_348, t_depth: 7_224 },
    ReferenceRow { design: "mult", width: 16, exponent_bits: 8, mantissa_bits: 7, qubits: 81, t_count: 6_328, t_depth: 2_580 },
    ReferenceRow { design: "mult", width: 32, exponent_bits: 8, mantissa_bits: 23, qubits: 158, t_count: 26_642, t_depth: 11_154 },
    ReferenceRow { design: "mult", width: 64, exponent_bits: 11, mantissa_bits: 52, qubits: 315, t_count: 122_752, t_depth: 52_116 },
];

/// Pairwise KQ ratios between reports, row-major over the input order.
///
/// Entry `(i, j)` holds `kq_i / kq_j`; comparing a floating-point
/// multiplier against a fixed-point one lands the float/fixed ratio in the
/// corresponding cell.
pub fn compare_formats(reports: &[(String, ResourceReport)]) -> Vec<(String, String, f64)> {
    let mut out = Vec::new();
    for (name_a, a) in reports {
        for (name_b, b) in reports {
            if std::ptr::eq(a, b) {
                continue;
            }
            out.push((
                name_a.clone(),
                name_b.clone(),
                compute_kq(a) as f64 / compute_kq(b) as f64,
            ));
        }
    }
    out
}
