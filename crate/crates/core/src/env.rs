//! The circuit-building environment.
//!
//! Each step decodes a continuous 4-vector `(o, q, c, phi)` in `[-1, 1]^4`
//! into an operation from `{M, Z, X, T}`, a target qubit, a control qubit and
//! an angle in `[-pi, pi]`:
//!
//! * `T` terminates the episode.
//! * `M` measures qubit `q` (collapsing the state); measuring every qubit
//!   terminates the episode.
//! * `X` places `RX(phi)` on `q` when `q == c`, otherwise `CX` with control `c`.
//! * `Z` places `P(phi)` on `q` when `q == c`, otherwise `CP(phi)` with control `c`.
//!
//! Gates touching a measured qubit are discarded. The episode is truncated
//! once the step counter reaches the depth budget. Every step pays the ramped
//! cost `C_t`; the final step additionally earns the challenge reward `R*`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;


#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::challenge::{Challenge, ChallengeSpec, TargetName};
use crate::circuit::{Appended, Circuit, GateRecord};
use crate::error::{bail, Result};
use crate::quantum::{apply_gate, init_state, measure_qubit, GateKind, StateVector};
use crate::{rng_from_seed, SimRng};

/// Raw agent action; components are clipped into `[-1, 1]` on construction
/// and NaN becomes 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action([f64; 4]);

impl Action {
    pub fn new(o: f64, q: f64, c: f64, phi: f64) -> Self {
        Self::from_array([o, q, c, phi])
    }

    pub fn from_array(raw: [f64; 4]) -> Self {
        Self(raw.map(|x| if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) }))
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }
}

/// Operation choice, in decoding bin order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Measure,
    Z,
    X,
    Terminate,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Measure, Op::Z, Op::X, Op::Terminate];

    pub fn symbol(&self) -> char {
        match self {
            Op::Measure => 'M',
            Op::Z => 'Z',
            Op::X => 'X',
            Op::Terminate => 'T',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedAction {
    pub op: Op,
    pub qubit: usize,
    pub control: usize,
    /// Radians in `[-pi, pi]`.
    pub angle: f64,
}

impl DecodedAction {
    /// Gate placed by this action, if any, as `(kind, target, control)`.
    pub fn gate(&self) -> Option<(GateKind, usize, Option<usize>)> {
        let uncontrolled = self.qubit == self.control;
        let control = (!uncontrolled).then_some(self.control);
        match (self.op, uncontrolled) {
            (Op::X, true) => Some((GateKind::Rx(self.angle), self.qubit, None)),
            (Op::X, false) => Some((GateKind::Cx, self.qubit, control)),
            (Op::Z, true) => Some((GateKind::Phase(self.angle), self.qubit, None)),
            (Op::Z, false) => Some((GateKind::CPhase(self.angle), self.qubit, control)),
            _ => None,
        }
    }
}

fn bin(x: f64, bins: usize) -> usize {
    let idx = ((x + 1.0) / 2.0 * bins as f64).floor();
    (idx.max(0.0) as usize).min(bins - 1)
}

/// Map a raw action to an operation, qubit, control and angle.
///
/// Each discrete component splits `[-1, 1]` into equal bins; the upper edge
/// falls into the last bin. The angle is `phi * pi`.
pub fn decode_action(raw: &Action, num_qubits: usize) -> DecodedAction {
    let [o, q, c, phi] = raw.0;
    DecodedAction {
        op: Op::ALL[bin(o, 4)],
        qubit: bin(q, num_qubits),
        control: bin(c, num_qubits),
        angle: phi * PI,
    }
}

/// Where the step-cost ramp starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostSchedule {
    /// `C_t = max(0, 3/(2 sigma) (t - sigma/3))`.
    #[default]
    Ramp,
    /// Onset at two thirds of the budget: `C_t = max(0, 3/sigma (t - 2 sigma/3))`.
    LateRamp,
}

impl CostSchedule {
    pub fn cost(&self, t: usize, sigma: usize) -> f64 {
        match self {
            CostSchedule::Ramp => step_cost(t, sigma),
            CostSchedule::LateRamp => {
                let (t, s) = (t as f64, sigma as f64);
                (3.0 / s * (t - 2.0 * s / 3.0)).max(0.0)
            }
        }
    }
}

/// Ramped per-step cost with budget `sigma`: 0 up to `sigma/3`, 1 at `sigma`.
pub fn step_cost(t: usize, sigma: usize) -> f64 {
    let (t, s) = (t as f64, sigma as f64);
    (3.0 / (2.0 * s) * (t - s / 3.0)).max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub challenge: Challenge,
    /// Seed used for random targets when the challenge spec carries none.
    pub seed: u64,
    pub cost: CostSchedule,
    /// Redraw random targets on every reset (from the reset seed) instead of
    /// once per run.
    pub resample_target: bool,
}

impl EnvConfig {
    pub fn new(challenge: Challenge, seed: u64) -> Self {
        Self { challenge, seed, cost: CostSchedule::default(), resample_target: false }
    }

    /// Materialise a named challenge spec.
    pub fn from_spec(spec: &ChallengeSpec, seed: u64) -> Result<Self> {
        Ok(Self::new(Challenge::from_spec(spec, seed)?, seed))
    }

    pub fn num_qubits(&self) -> usize {
        self.challenge.num_qubits()
    }

    pub fn max_depth(&self) -> usize {
        self.challenge.max_depth()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub depth: usize,
    pub qubits_used: usize,
    pub action: DecodedAction,
    /// Gate actually recorded this step.
    pub applied: Option<GateKind>,
    /// Measurement outcome, for `M` steps.
    pub outcome: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// Episodic reset/step contract shared by the circuit designer and test environments.
pub trait Environment {
    fn observation_len(&self) -> usize;

    /// Depth budget; episodes never exceed this many steps.
    fn max_steps(&self) -> usize;

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>>;

    fn step(&mut self, action: &Action) -> Result<StepResult>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Idle,
    Live,
    Done,
}

/// The circuit-building MDP over a [`Challenge`].
#[derive(Debug, Clone)]
pub struct CircuitDesigner {
    config: EnvConfig,
    challenge: Challenge,
    state: StateVector,
    circuit: Circuit,
    step: usize,
    rng: SimRng,
    phase: Phase,
}

impl CircuitDesigner {
    pub fn new(config: EnvConfig) -> Result<Self> {
        let n = config.num_qubits();
        let state = init_state(n)?;
        let circuit = Circuit::new(n, config.max_depth())?;
        Ok(Self {
            challenge: config.challenge.clone(),
            rng: rng_from_seed(config.seed),
            config,
            state,
            circuit,
            step: 0,
            phase: Phase::Idle,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn challenge(&self) -> &Challenge {
        &self.challenge
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Steps taken in the current episode.
    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn observation(&self) -> Vec<f64> {
        self.state.to_interleaved()
    }
}

/// Seed for a per-episode random target, decorrelated from the measurement stream.
fn target_seed(reset_seed: u64) -> u64 {
    reset_seed ^ 0x9E37_79B9_7F4A_7C15
}

impl Environment for CircuitDesigner {
    fn observation_len(&self) -> usize {
        2 << self.config.num_qubits()
    }

    fn max_steps(&self) -> usize {
        self.config.max_depth()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>> {
        let n = self.config.num_qubits();
        if self.config.resample_target && self.challenge.spec().target == TargetName::Random {
            let mut spec = self.challenge.spec().clone();
            spec.seed = Some(target_seed(seed));
            self.challenge = Challenge::from_spec(&spec, seed)?;
        }
        self.state = init_state(n)?;
        self.circuit = Circuit::new(n, self.config.max_depth())?;
        self.step = 0;
        self.rng = rng_from_seed(seed);
        self.phase = Phase::Live;
        Ok(self.observation())
    }

    fn step(&mut self, action: &Action) -> Result<StepResult> {
        match self.phase {
            Phase::Live => {}
            Phase::Idle => bail!(InvalidState, "step before reset"),
            Phase::Done => bail!(InvalidState, "step on a finished episode; call reset"),
        }
        let n = self.config.num_qubits();
        let decoded = decode_action(action, n);
        self.step += 1;

        let mut terminated = false;
        let mut applied = None;
        let mut outcome = None;
        match decoded.op {
            Op::Terminate => terminated = true,
            Op::Measure => {
                let (bit, collapsed) = measure_qubit(&self.state, decoded.qubit, &mut self.rng)?;
                self.state = collapsed;
                self.circuit.mark_measured(decoded.qubit)?;
                outcome = Some(bit);
                terminated = self.circuit.all_measured();
            }
            Op::X | Op::Z => {
                let (kind, target, control) = decoded.gate().expect("gate op");
                let record = GateRecord::new(kind, target, control, self.step);
                if self.circuit.append(record)? == Appended::Recorded {
                    self.state = apply_gate(&self.state, kind, target, control)?;
                    applied = Some(kind);
                }
            }
        }
        let truncated = !terminated && self.step >= self.config.max_depth();
        let done = terminated || truncated;

        let task = self.challenge.reward(&self.state, &self.circuit, done)?;
        let reward = task - self.config.cost.cost(self.step, self.config.max_depth());
        if done {
            self.circuit.terminate();
            self.phase = Phase::Done;
        }
        if !reward.is_finite() {
            bail!(InvalidState, "non-finite reward at step {}", self.step);
        }
        Ok(StepResult {
            observation: self.observation(),
            reward,
            terminated,
            truncated,
            info: StepInfo {
                step: self.step,
                depth: self.circuit.depth(),
                qubits_used: self.circuit.qubits_used(),
                action: decoded,
                applied,
                outcome,
            },
        })
    }
}

/// Raw action that decodes to the given operation and wires.
///
/// Picks bin centres so the result survives decoding exactly; `angle` must
/// lie in `[-pi, pi]`.
pub fn encode_action(op: Op, qubit: usize, control: usize, angle: f64, num_qubits: usize) -> Result<Action> {
    if qubit >= num_qubits || control >= num_qubits {
        bail!(InvalidAction, "{}", format!("qubits ({qubit}, {control}) out of range for {num_qubits}"));
    }
    if !(-PI..=PI).contains(&angle) {
        bail!(InvalidAction, "angle {angle} outside [-pi, pi]");
    }
    let centre = |i: usize, bins: usize| (2.0 * i as f64 + 1.0) / bins as f64 - 1.0;
    let o = Op::ALL.iter().position(|&x| x == op).expect("op in table");
    Ok(Action::new(centre(o, 4), centre(qubit, num_qubits), centre(control, num_qubits), angle / PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::challenge::parse_challenge_spec;
    use core::f64::consts::FRAC_PI_2;

    fn env(spec: &str) -> CircuitDesigner {
        CircuitDesigner::new(EnvConfig::from_spec(&parse_challenge_spec(spec).unwrap(), 0).unwrap()).unwrap()
    }

    #[test]
    fn decode_examples() {
        let d = decode_action(&Action::new(-1.0, -1.0, -1.0, 0.0), 2);
        assert_eq!((d.op, d.qubit, d.control, d.angle), (Op::Measure, 0, 0, 0.0));
        let d = decode_action(&Action::new(1.0, 1.0, 1.0, 1.0), 2);
        assert_eq!((d.op, d.qubit, d.control, d.angle), (Op::Terminate, 1, 1, PI));
        let d = decode_action(&Action::new(0.1, -0.2, -0.2, -0.5), 2);
        assert_eq!((d.op, d.qubit, d.control), (Op::X, 0, 0));
        assert_eq!(d.angle, -FRAC_PI_2);
        assert_eq!(d.gate(), Some((GateKind::Rx(-FRAC_PI_2), 0, None)));
    }

    #[test]
    fn actions_are_clipped() {
        assert_eq!(Action::new(3.0, -7.0, f64::NAN, 0.5).components(), [1.0, -1.0, 0.0, 0.5]);
    }

    #[test]
    fn encode_decodes_back() {
        for op in Op::ALL {
            for q in 0..3 {
                for c in 0..3 {
                    let a = encode_action(op, q, c, -1.0, 3).unwrap();
                    let d = decode_action(&a, 3);
                    assert_eq!((d.op, d.qubit, d.control), (op, q, c));
                    assert!((d.angle + 1.0).abs() < 1e-15);
                }
            }
        }
        assert!(encode_action(Op::X, 3, 0, 0.0, 3).is_err());
    }

    #[test]
    fn step_cost_profile() {
        assert_eq!(step_cost(4, 12), 0.0);
        assert_eq!(step_cost(1, 12), 0.0);
        assert_eq!(step_cost(5, 12), 0.125);
        assert_eq!(step_cost(8, 12), 0.5);
        assert_eq!(step_cost(12, 12), 1.0);
        assert_eq!(CostSchedule::LateRamp.cost(8, 12), 0.0);
        assert_eq!(CostSchedule::LateRamp.cost(12, 12), 1.0);
    }

    #[test]
    fn reset_gives_zero_state() {
        let mut e = env("SP-bell");
        assert_eq!(e.observation_len(), 8);
        assert_eq!(e.reset(1).unwrap(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn stepping_requires_live_episode() {
        let mut e = env("SP-bell");
        let t = Action::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(e.step(&t), Err(crate::Error::InvalidState(_))));
        e.reset(0).unwrap();
        assert!(e.step(&t).unwrap().terminated);
        assert!(matches!(e.step(&t), Err(crate::Error::InvalidState(_))));
        e.reset(0).unwrap();
        assert!(e.step(&t).is_ok());
    }

    #[test]
    fn immediate_termination_on_bell() {
        let mut e = env("SP-bell");
        e.reset(0).unwrap();
        let r = e.step(&Action::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(r.terminated && !r.truncated);
        assert!((r.reward - 0.5).abs() < 1e-12);
        assert_eq!((r.info.depth, r.info.qubits_used, r.info.step), (0, 0, 1));
    }

    #[test]
    fn bell_sequence_return() {
        let mut e = env("SP-bell");
        e.reset(0).unwrap();
        let seq = [
            encode_action(Op::Z, 0, 0, FRAC_PI_2, 2).unwrap(),
            encode_action(Op::X, 0, 0, FRAC_PI_2, 2).unwrap(),
            encode_action(Op::Z, 0, 0, FRAC_PI_2, 2).unwrap(),
            encode_action(Op::X, 1, 0, 0.0, 2).unwrap(),
            encode_action(Op::Terminate, 0, 0, 0.0, 2).unwrap(),
        ];
        let mut total = 0.0;
        let mut last = None;
        for a in &seq {
            let r = e.step(a).unwrap();
            total += r.reward;
            last = Some(r);
        }
        let last = last.unwrap();
        assert!(last.terminated);
        // C_5 = 3/24 * (5 - 4)
        assert!((last.reward - 0.875).abs() < 1e-12);
        assert!((total - 0.875).abs() < 1e-12);
        assert_eq!((last.info.qubits_used, last.info.depth), (2, 4));
    }

    #[test]
    fn measuring_every_qubit_terminates() {
        let mut e = env("UC-hadamard");
        e.reset(0).unwrap();
        let r = e.step(&encode_action(Op::Measure, 0, 0, 0.0, 1).unwrap()).unwrap();
        assert!(r.terminated);
        assert_eq!(r.info.outcome, Some(0));
        // V is the empty circuit: identity against H
        assert!((r.reward - (1.0 - 4.0f64.atan())).abs() < 1e-12);

        let mut e = env("SP-bell");
        e.reset(0).unwrap();
        let r = e.step(&encode_action(Op::Measure, 1, 0, 0.0, 2).unwrap()).unwrap();
        assert!(!r.terminated);
        // gate on the measured wire is discarded
        let r = e.step(&encode_action(Op::X, 1, 1, 1.0, 2).unwrap()).unwrap();
        assert_eq!(r.info.applied, None);
        assert_eq!(r.observation[0], 1.0);
        let r = e.step(&encode_action(Op::Measure, 0, 0, 0.0, 2).unwrap()).unwrap();
        assert!(r.terminated);
        assert!((r.reward - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncates_at_depth_budget() {
        let mut e = env("UC-hadamard");
        e.reset(0).unwrap();
        let rx = Action::new(0.1, 0.0, 0.0, 0.01);
        for t in 1..=9 {
            let r = e.step(&rx).unwrap();
            assert_eq!(r.truncated, t == 9);
            assert!(!r.terminated);
            assert!(r.reward >= -2.0 && r.reward <= 1.0);
        }
        assert!(e.is_done());
    }

    #[test]
    fn resampled_targets_follow_reset_seed() {
        let spec = parse_challenge_spec("SP-random").unwrap();
        let mut cfg = EnvConfig::from_spec(&spec, 3).unwrap();
        cfg.resample_target = true;
        let mut e = CircuitDesigner::new(cfg).unwrap();
        e.reset(1).unwrap();
        let a = e.challenge().target().clone();
        e.reset(2).unwrap();
        assert_ne!(&a, e.challenge().target());
        e.reset(1).unwrap();
        assert_eq!(&a, e.challenge().target());

        let mut fixed = env("SP-random");
        fixed.reset(1).unwrap();
        let b = fixed.challenge().target().clone();
        fixed.reset(2).unwrap();
        assert_eq!(&b, fixed.challenge().target());
    }
}
