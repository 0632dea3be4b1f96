use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::{Decision, Policy};
use crate::env::{encode_action, Action, Op};
use crate::error::{bail, Result};
use crate::SimRng;

/// Replays a fixed action list, then terminates.
///
/// Known scripts are the exact certificates for the named challenges:
///
/// * `hadamard`: `P(pi/2) RX(pi/2) P(pi/2)` on qubit 0, which is `H` exactly.
/// * `bell`: that Hadamard on qubit 0, then `CX 0->1`.
/// * `ghz`: the Bell script extended with `CX` links down the register.
/// * `toffoli`: the textbook 15-gate Clifford+T decomposition of `CCX`
///   (controls 0 and 1, target 2) with each `H` expanded as above.
/// * `terminate`: terminate immediately (the empty circuit).
#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    actions: Vec<Action>,
    cursor: usize,
    terminate: Action,
}

impl ScriptedPolicy {
    pub fn from_actions(actions: Vec<Action>) -> Self {
        Self { actions, cursor: 0, terminate: Action::new(1.0, 0.0, 0.0, 0.0) }
    }

    pub fn terminate() -> Self {
        Self::from_actions(Vec::new())
    }

    pub fn new(name: &str, num_qubits: usize) -> Result<Self> {
        let n = num_qubits;
        let mut seq = Vec::new();
        let hadamard = |seq: &mut Vec<Action>, q: usize| -> Result<()> {
            seq.push(encode_action(Op::Z, q, q, FRAC_PI_2, n)?);
            seq.push(encode_action(Op::X, q, q, FRAC_PI_2, n)?);
            seq.push(encode_action(Op::Z, q, q, FRAC_PI_2, n)?);
            Ok(())
        };
        let cx = |c: usize, t: usize| encode_action(Op::X, t, c, 0.0, n);
        let phase = |q: usize, a: f64| encode_action(Op::Z, q, q, a, n);
        match name {
            "terminate" => {}
            "hadamard" => hadamard(&mut seq, 0)?,
            "bell" | "ghz" => {
                if n < 2 {
                    bail!(InvalidConfig, "{name} script needs at least 2 qubits");
                }
                hadamard(&mut seq, 0)?;
                for t in 1..n {
                    seq.push(cx(t - 1, t)?);
                }
            }
            "toffoli" => {
                if n < 3 {
                    bail!(InvalidConfig, "toffoli script needs at least 3 qubits");
                }
                let (a, b, c) = (0, 1, 2);
                let t = FRAC_PI_4;
                hadamard(&mut seq, c)?;
                seq.push(cx(b, c)?);
                seq.push(phase(c, -t)?);
                seq.push(cx(a, c)?);
                seq.push(phase(c, t)?);
                seq.push(cx(b, c)?);
                seq.push(phase(c, -t)?);
                seq.push(cx(a, c)?);
                seq.push(phase(b, t)?);
                seq.push(phase(c, t)?);
                hadamard(&mut seq, c)?;
                seq.push(cx(a, b)?);
                seq.push(phase(a, t)?);
                seq.push(phase(b, -t)?);
                seq.push(cx(a, b)?);
            }
            other => bail!(InvalidConfig, "no script named {other:?}"),
        }
        Ok(Self::from_actions(seq))
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }
}

impl Policy for ScriptedPolicy {
    fn act(&mut self, _observation: &[f64], _explore: bool, _rng: &mut SimRng) -> Decision {
        let a = self.actions.get(self.cursor).copied().unwrap_or(self.terminate);
        self.cursor += 1;
        a.into()
    }

    fn begin_episode(&mut self) {
        self.cursor = 0;
    }
}
