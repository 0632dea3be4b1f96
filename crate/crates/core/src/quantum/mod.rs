//! Dense statevector simulation.
//!
//! Everything here is a pure function of its inputs; randomness enters only
//! through an explicit generator or seed.

pub(crate) mod gates;
mod haar;
mod matrix;
mod state;

pub use gates::{
    apply_gate, embed_unitary, gate_matrix, hadamard, pauli_x, pauli_y, pauli_z, t_gate, toffoli,
    GateKind,
};
pub use haar::{haar_random_state, haar_random_unitary, qr_decompose, standard_complex_gaussian, standard_normal};
pub use matrix::{compose, frobenius_distance, Matrix, UnitaryMatrix};
pub use state::{fidelity, init_state, measure_qubit, StateVector};

pub use num_complex::Complex64 as C64;

/// Hard cap on the register size of a statevector.
pub const MAX_QUBITS: usize = 20;

/// Hard cap on the register size of a dense unitary (4^n entries).
pub const MAX_UNITARY_QUBITS: usize = 10;

/// Single-operation numerical tolerance.
pub const TOL: f64 = 1e-9;

/// Tolerance after long gate compositions.
pub const TOL_LONG: f64 = 1e-8;

/// Bit mask selecting `qubit` in an amplitude index of an `num_qubits` register.
#[inline]
pub(crate) fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}
