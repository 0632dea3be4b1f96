use alloc::vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use core::fmt;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;
use num_traits::{One, Zero};

use super::{qubit_mask, Matrix, StateVector, C64};
use crate::error::{bail, Result};

/// The parameterized gate set available to the agent.
///
/// Angles are in radians and must lie in `[-pi, pi]`. Two-qubit kinds take a
/// control and a target; their 4x4 matrices are written in (control, target)
/// order, control being the more significant bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    /// `exp(-i a/2 X)`.
    Rx(f64),
    /// `exp(i a/2) exp(-i a/2 Z) = diag(1, e^{ia})`.
    Phase(f64),
    /// CNOT.
    Cx,
    /// Controlled phase shift, `diag(1, 1, 1, e^{ia})`.
    CPhase(f64),
}

impl GateKind {
    /// Number of wires the gate touches (1 or 2).
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Rx(_) | GateKind::Phase(_) => 1,
            GateKind::Cx | GateKind::CPhase(_) => 2,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(a) | GateKind::Phase(a) | GateKind::CPhase(a) => Some(a),
            GateKind::Cx => None,
        }
    }

    /// Short mnemonic: `RX`, `P`, `CX`, `CP`.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rx(_) => "RX",
            GateKind::Phase(_) => "P",
            GateKind::Cx => "CX",
            GateKind::CPhase(_) => "CP",
        }
    }

    /// Inverse of [`GateKind::name`], with the angle supplied separately.
    pub fn from_name(name: &str, angle: Option<f64>) -> Result<Self> {
        let kind = match (name, angle) {
            ("RX", Some(a)) => GateKind::Rx(a),
            ("P", Some(a)) => GateKind::Phase(a),
            ("CP", Some(a)) => GateKind::CPhase(a),
            ("CX", None) => GateKind::Cx,
            _ => bail!(InvalidArgument, "unknown gate {name:?} with angle {angle:?}"),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.angle() {
            if !(-PI..=PI).contains(&a) {
                bail!(InvalidAction, "{} angle {a} outside [-pi, pi]", self.name());
            }
        }
        Ok(())
    }

    /// The 2x2 block acting on the target wire (for controlled kinds, the
    /// block applied when the control is 1).
    fn target_block(&self) -> [C64; 4] {
        let z = C64::zero();
        let o = C64::one();
        match *self {
            GateKind::Rx(a) => {
                let (s, c) = (a / 2.0).sin_cos();
                let m = C64::new(0.0, -s);
                [C64::new(c, 0.0), m, m, C64::new(c, 0.0)]
            }
            GateKind::Phase(a) | GateKind::CPhase(a) => [o, z, z, C64::cis(a)],
            GateKind::Cx => [z, o, o, z],
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.angle() {
            Some(a) => write!(f, "{}({a:.3})", self.name()),
            None => write!(f, "{}", self.name()),
        }
    }
}

/// Exact matrix of a gate kind: 2x2 for one-qubit kinds, 4x4 in
/// (control, target) order for two-qubit kinds.
pub fn gate_matrix(kind: GateKind) -> Matrix {
    let b = kind.target_block();
    match kind.arity() {
        1 => Matrix::from_entries(2, vec![b[0], b[1], b[2], b[3]]).expect("2x2"),
        _ => {
            // |0><0| (x) I + |1><1| (x) B
            let mut m = Matrix::identity(4);
            m[(2, 2)] = b[0];
            m[(2, 3)] = b[1];
            m[(3, 2)] = b[2];
            m[(3, 3)] = b[3];
            m
        }
    }
}

pub fn pauli_x() -> Matrix {
    let (z, o) = (C64::zero(), C64::one());
    Matrix::from_entries(2, vec![z, o, o, z]).expect("2x2")
}

pub fn pauli_y() -> Matrix {
    let z = C64::zero();
    Matrix::from_entries(2, vec![z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z]).expect("2x2")
}

pub fn pauli_z() -> Matrix {
    let (z, o) = (C64::zero(), C64::one());
    Matrix::from_entries(2, vec![o, z, z, -o]).expect("2x2")
}

pub fn hadamard() -> Matrix {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    Matrix::from_entries(2, vec![s, s, s, -s]).expect("2x2")
}

pub fn t_gate() -> Matrix {
    let (z, o) = (C64::zero(), C64::one());
    Matrix::from_entries(2, vec![o, z, z, C64::cis(PI / 4.0)]).expect("2x2")
}

/// CCX with controls on qubits 0 and 1 and target on qubit 2:
/// identity except `|110>` and `|111>` exchanged.
pub fn toffoli() -> Matrix {
    let mut m = Matrix::identity(8);
    m[(6, 6)] = C64::zero();
    m[(7, 7)] = C64::zero();
    m[(6, 7)] = C64::one();
    m[(7, 6)] = C64::one();
    m
}

pub(crate) fn check_wires(kind: &GateKind, target: usize, control: Option<usize>, num_qubits: usize) -> Result<()> {
    if target >= num_qubits {
        bail!(InvalidAction, "target qubit {target} out of range for {num_qubits} qubits");
    }
    match (kind.arity(), control) {
        (1, None) => Ok(()),
        (2, Some(c)) if c >= num_qubits => {
            bail!(InvalidAction, "control qubit {c} out of range for {num_qubits} qubits")
        }
        (2, Some(c)) if c == target => bail!(InvalidAction, "control and target are both qubit {c}"),
        (2, Some(_)) => Ok(()),
        (1, Some(_)) => bail!(InvalidAction, "{} takes no control qubit", kind.name()),
        _ => bail!(InvalidAction, "{} requires a control qubit", kind.name()),
    }
}

/// Apply one gate to a statevector in place of the full embedded matrix.
///
/// Walks the amplitude pairs that differ only in the target bit and applies
/// the 2x2 target block, skipping pairs whose control bit is 0.
pub fn apply_gate(
    state: &StateVector,
    kind: GateKind,
    target: usize,
    control: Option<usize>,
) -> Result<StateVector> {
    let n = state.num_qubits();
    check_wires(&kind, target, control, n)?;
    kind.validate()?;
    let mut out = state.clone();
    apply_in_place(out.amplitudes_mut(), n, kind, target, control);
    Ok(out)
}

pub(crate) fn apply_in_place(
    amps: &mut [C64],
    num_qubits: usize,
    kind: GateKind,
    target: usize,
    control: Option<usize>,
) {
    let [a, b, c, d] = kind.target_block();
    let tmask = qubit_mask(target, num_qubits);
    let cmask = control.map_or(0, |q| qubit_mask(q, num_qubits));
    for i0 in 0..amps.len() {
        if i0 & tmask != 0 || i0 & cmask != cmask {
            continue;
        }
        let i1 = i0 | tmask;
        let (x0, x1) = (amps[i0], amps[i1]);
        amps[i0] = a * x0 + b * x1;
        amps[i1] = c * x0 + d * x1;
    }
}

/// The full `2^n x 2^n` matrix acting as `gate` on the given wires and as
/// identity elsewhere.
///
/// `gate` is 2x2 without a control, or 4x4 in (control, target) order with one.
pub fn embed_unitary(
    gate: &Matrix,
    target: usize,
    control: Option<usize>,
    num_qubits: usize,
) -> Result<Matrix> {
    if num_qubits == 0 || num_qubits > super::MAX_UNITARY_QUBITS {
        bail!(InvalidArgument, "cannot embed into {num_qubits} qubits");
    }
    let arity = if control.is_some() { 2 } else { 1 };
    if gate.dim() != 1 << arity {
        bail!(InvalidAction, "{}x{} gate does not match {arity} wire(s)", gate.dim(), gate.dim());
    }
    if target >= num_qubits {
        bail!(InvalidAction, "target qubit {target} out of range for {num_qubits} qubits");
    }
    if let Some(c) = control {
        if c >= num_qubits {
            bail!(InvalidAction, "control qubit {c} out of range for {num_qubits} qubits");
        }
        if c == target {
            bail!(InvalidAction, "control and target are both qubit {c}");
        }
    }
    let tmask = qubit_mask(target, num_qubits);
    let cmask = control.map_or(0, |q| qubit_mask(q, num_qubits));
    let wires = tmask | cmask;
    let local = |i: usize| -> usize {
        let t = (i & tmask != 0) as usize;
        match control {
            Some(_) => (((i & cmask != 0) as usize) << 1) | t,
            None => t,
        }
    };
    let dim = 1usize << num_qubits;
    let mut out = Matrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !wires == c & !wires {
                out[(r, c)] = gate[(local(r), local(c))];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{compose, init_state, TOL};
    use core::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rx_zero_is_identity() {
        assert_eq!(gate_matrix(GateKind::Rx(0.0)), Matrix::identity(2));
    }

    #[test]
    fn phase_half_pi_is_s() {
        let p = gate_matrix(GateKind::Phase(FRAC_PI_2));
        let s = Matrix::from_entries(2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert!(p.max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn phase_matches_exponential_form() {
        // exp(i a/2) * exp(-i a/2 Z) evaluated term by term
        for &a in &[-PI, -1.3, 0.0, 0.4, FRAC_PI_2, PI] {
            let pre = C64::cis(a / 2.0);
            let lit = Matrix::from_entries(
                2,
                vec![pre * C64::cis(-a / 2.0), c(0.0, 0.0), c(0.0, 0.0), pre * C64::cis(a / 2.0)],
            )
            .unwrap();
            assert!(gate_matrix(GateKind::Phase(a)).max_abs_diff(&lit) < 1e-15);
        }
    }

    #[test]
    fn rx_matches_exponential_form() {
        // exp(-i a/2 X) = cos(a/2) I - i sin(a/2) X
        for &a in &[-PI, -0.7, 0.0, 1.1, PI] {
            let (s, co) = (a / 2.0).sin_cos();
            let lit = Matrix::identity(2)
                .scale(c(co, 0.0))
                .entries()
                .iter()
                .zip(pauli_x().scale(c(0.0, -s)).entries())
                .map(|(x, y)| x + y)
                .collect();
            let lit = Matrix::from_entries(2, lit).unwrap();
            assert!(gate_matrix(GateKind::Rx(a)).max_abs_diff(&lit) < 1e-15);
        }
    }

    #[test]
    fn cx_swaps_10_and_11() {
        let m = gate_matrix(GateKind::Cx);
        let mut expected = Matrix::identity(4);
        expected[(2, 2)] = C64::zero();
        expected[(3, 3)] = C64::zero();
        expected[(2, 3)] = C64::one();
        expected[(3, 2)] = C64::one();
        assert_eq!(m, expected);
    }

    #[test]
    fn cp_is_symmetric_diagonal() {
        let m = gate_matrix(GateKind::CPhase(0.3));
        for i in 0..4 {
            for j in 0..4 {
                let e = if i != j { C64::zero() } else if i == 3 { C64::cis(0.3) } else { C64::one() };
                assert!((m[(i, j)] - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn hadamard_reconstruction_is_exact() {
        let p = gate_matrix(GateKind::Phase(FRAC_PI_2));
        let rx = gate_matrix(GateKind::Rx(FRAC_PI_2));
        let prod = compose(&p, &compose(&rx, &p).unwrap()).unwrap();
        assert!(prod.max_abs_diff(&hadamard()) < 1e-12);
    }

    #[test]
    fn reference_gates_are_unitary() {
        for m in [hadamard(), t_gate(), toffoli(), pauli_x(), pauli_y(), pauli_z()] {
            assert!(m.is_unitary(TOL));
        }
        assert!(compose(&t_gate(), &t_gate()).unwrap().max_abs_diff(&gate_matrix(GateKind::Phase(FRAC_PI_2))) < 1e-15);
    }

    #[test]
    fn rx_pi_on_zero() {
        let s = apply_gate(&init_state(1).unwrap(), GateKind::Rx(PI), 0, None).unwrap();
        assert!((s.amplitudes()[0]).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn cx_on_zero_control_is_noop() {
        let s0 = init_state(2).unwrap();
        assert_eq!(apply_gate(&s0, GateKind::Cx, 1, Some(0)).unwrap(), s0);
    }

    #[test]
    fn cx_builds_bell() {
        let r = FRAC_1_SQRT_2;
        let plus0 = StateVector::from_amplitudes(vec![c(r, 0.0), c(0.0, 0.0), c(r, 0.0), c(0.0, 0.0)]).unwrap();
        let bell = apply_gate(&plus0, GateKind::Cx, 1, Some(0)).unwrap();
        let oracle = gate_matrix(GateKind::Cx).apply_to(plus0.amplitudes());
        for (a, b) in bell.amplitudes().iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((bell.amplitudes()[3] - c(r, 0.0)).norm() < 1e-15);
        assert!(bell.amplitudes()[2].norm() < 1e-15);
    }

    #[test]
    fn arity_and_range_errors() {
        let s = init_state(2).unwrap();
        assert!(apply_gate(&s, GateKind::Rx(0.1), 2, None).is_err());
        assert!(apply_gate(&s, GateKind::Rx(0.1), 0, Some(1)).is_err());
        assert!(apply_gate(&s, GateKind::Cx, 0, None).is_err());
        assert!(apply_gate(&s, GateKind::Cx, 0, Some(0)).is_err());
        assert!(apply_gate(&s, GateKind::CPhase(0.1), 0, Some(5)).is_err());
        assert!(apply_gate(&s, GateKind::Phase(4.0), 0, None).is_err());
        assert!(embed_unitary(&gate_matrix(GateKind::Cx), 0, None, 2).is_err());
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_unitary(&gate_matrix(GateKind::Rx(0.0)), 0, None, 3).unwrap(), Matrix::identity(8));
        let g = gate_matrix(GateKind::Rx(PI));
        assert_eq!(embed_unitary(&g, 0, None, 1).unwrap(), g);
        // control on the more significant wire reproduces the gate itself
        let cx = gate_matrix(GateKind::Cx);
        assert_eq!(embed_unitary(&cx, 1, Some(0), 2).unwrap(), cx);
    }
}
