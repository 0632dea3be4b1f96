//! The growing gate sequence of an episode.
//!
//! A [`Circuit`] records every applied gate in order together with per-qubit
//! measurement flags. Gates that touch a measured qubit (as target or
//! control) are discarded rather than recorded. Depth is moment-scheduled:
//! each gate lands in the earliest layer where all of its wires are free.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::{bail, Result};
use crate::quantum::{embed_unitary, gate_matrix, gates::check_wires, Matrix, MAX_QUBITS, MAX_UNITARY_QUBITS};
use crate::quantum::GateKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateRecord {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    /// Environment step index at which the gate was placed (1-based).
    pub step: usize,
}

impl GateRecord {
    pub fn new(kind: GateKind, target: usize, control: Option<usize>, step: usize) -> Self {
        Self { kind, target, control, step }
    }

    /// Wires touched by the gate, target first.
    pub fn wires(&self) -> impl Iterator<Item = usize> {
        core::iter::once(self.target).chain(self.control)
    }
}

/// Whether [`Circuit::append`] kept the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Appended {
    Recorded,
    /// The gate touched a measured qubit and was dropped.
    Discarded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    max_depth: usize,
    records: Vec<GateRecord>,
    measured: Vec<bool>,
    terminated: bool,
}

impl Circuit {
    pub fn new(num_qubits: usize, max_depth: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            bail!(InvalidConfig, "num_qubits must be in 1..={MAX_QUBITS}, got {num_qubits}");
        }
        if max_depth == 0 {
            bail!(InvalidConfig, "max_depth must be at least 1");
        }
        Ok(Self { num_qubits, max_depth, records: Vec::new(), measured: vec![false; num_qubits], terminated: false })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn records(&self) -> &[GateRecord] {
        &self.records
    }

    pub fn measured(&self) -> &[bool] {
        &self.measured
    }

    pub fn all_measured(&self) -> bool {
        self.measured.iter().all(|&m| m)
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Append `record` unless it touches a measured qubit.
    pub fn append(&mut self, record: GateRecord) -> Result<Appended> {
        if self.terminated {
            bail!(InvalidState, "cannot append to a terminated circuit");
        }
        check_wires(&record.kind, record.target, record.control, self.num_qubits)?;
        record.kind.validate()?;
        if record.step == 0 || record.step > self.max_depth {
            bail!(InvalidArgument, "step {} outside 1..={}", record.step, self.max_depth);
        }
        if let Some(last) = self.records.last() {
            if record.step <= last.step {
                bail!(InvalidArgument, "step {} does not follow step {}", record.step, last.step);
            }
        }
        if record.wires().any(|q| self.measured[q]) {
            return Ok(Appended::Discarded);
        }
        self.records.push(record);
        Ok(Appended::Recorded)
    }

    pub fn mark_measured(&mut self, qubit: usize) -> Result<()> {
        if self.terminated {
            bail!(InvalidState, "cannot measure on a terminated circuit");
        }
        if qubit >= self.num_qubits {
            bail!(InvalidAction, "measured qubit {qubit} out of range for {} qubits", self.num_qubits);
        }
        self.measured[qubit] = true;
        Ok(())
    }

    pub fn terminate(&mut self) {
        self.terminated = true;
    }

    /// Layer index of every record under greedy moment scheduling.
    pub fn layers(&self) -> Vec<usize> {
        let mut free = vec![0usize; self.num_qubits];
        self.records
            .iter()
            .map(|r| {
                let layer = r.wires().map(|q| free[q]).max().unwrap_or(0);
                for q in r.wires() {
                    free[q] = layer + 1;
                }
                layer
            })
            .collect()
    }

    /// Number of parallel layers.
    pub fn depth(&self) -> usize {
        self.layers().iter().map(|l| l + 1).max().unwrap_or(0)
    }

    /// Distinct qubits touched by any record.
    pub fn qubits_used(&self) -> usize {
        let mut used = vec![false; self.num_qubits];
        for r in &self.records {
            for q in r.wires() {
                used[q] = true;
            }
        }
        used.iter().filter(|&&u| u).count()
    }

    /// `V = G_k ... G_2 G_1` over the recorded gates; identity when empty.
    pub fn composed_unitary(&self) -> Result<Matrix> {
        if self.num_qubits > MAX_UNITARY_QUBITS {
            bail!(InvalidConfig, "composed unitary on {} qubits exceeds the cap of {MAX_UNITARY_QUBITS}", self.num_qubits);
        }
        let mut v = Matrix::identity(1 << self.num_qubits);
        for r in &self.records {
            let g = embed_unitary(&gate_matrix(r.kind), r.target, r.control, self.num_qubits)?;
            v = g.mul(&v);
        }
        Ok(v)
    }

    /// Text diagram: one row per wire, one column per drawing layer.
    ///
    /// Drawing layers treat a two-qubit gate as occupying every wire between
    /// control and target, so connectors never cross another gate. Controls
    /// show as `●`, CX targets as `⊕`, crossed wires as `┼`. Measured wires
    /// end in `┤M`.
    pub fn render_text(&self) -> String {
        let n = self.num_qubits;
        let mut free = vec![0usize; n];
        let mut columns: Vec<Vec<(usize, &GateRecord)>> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let (lo, hi) = span(r);
            let layer = free[lo..=hi].iter().copied().max().unwrap_or(0);
            for f in &mut free[lo..=hi] {
                *f = layer + 1;
            }
            if columns.len() <= layer {
                columns.resize_with(layer + 1, Vec::new);
            }
            columns[layer].push((i, r));
        }

        let label_width = alloc::format!("q{}", n - 1).len();
        let mut rows: Vec<String> = (0..n).map(|q| alloc::format!("q{q:<label_width$}: ─")).collect();
        for column in &columns {
            let mut cells: Vec<Option<String>> = vec![None; n];
            for (_, r) in column {
                let (lo, hi) = span(r);
                for q in lo..=hi {
                    cells[q] = Some(String::from("┼"));
                }
                cells[r.target] = Some(target_label(&r.kind));
                if let Some(c) = r.control {
                    cells[c] = Some(String::from("●"));
                }
            }
            let width = cells.iter().flatten().map(|s| s.chars().count()).max().unwrap_or(1);
            for (row, cell) in rows.iter_mut().zip(&cells) {
                let text = cell.as_deref().unwrap_or("─");
                let pad = width - text.chars().count();
                let left = pad / 2;
                for _ in 0..left {
                    row.push('─');
                }
                row.push_str(text);
                for _ in 0..pad - left {
                    row.push('─');
                }
                row.push('─');
            }
        }
        let mut out = String::new();
        for (q, row) in rows.iter().enumerate() {
            out.push_str(row);
            if self.measured[q] {
                out.push_str("┤M");
            }
            out.push('\n');
        }
        out
    }
}

fn span(r: &GateRecord) -> (usize, usize) {
    let c = r.control.unwrap_or(r.target);
    (r.target.min(c), r.target.max(c))
}

fn target_label(kind: &GateKind) -> String {
    let mut s = String::new();
    match kind {
        GateKind::Cx => s.push('⊕'),
        GateKind::Rx(a) => write!(s, "RX({a:.3})").expect("string write"),
        GateKind::Phase(a) | GateKind::CPhase(a) => write!(s, "P({a:.3})").expect("string write"),
    }
    s
}
