//! Independent Monte-Carlo and finite-difference checks.
//!
//! Each oracle measures a quantity by a route that does not go through the
//! code path it verifies and reports it next to the expected value. The CLI's
//! `oracle` subcommand and the acceptance tests both run these.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::agents::{run_episode, Decision, ReinforceConfig, ReinforcePolicy, ScriptedPolicy, Trajectory, Transition};
use crate::challenge::{parse_challenge_spec, Target};
use crate::env::{Action, CircuitDesigner, EnvConfig};
use crate::error::{bail, Result};
use crate::quantum::{
    apply_gate, embed_unitary, frobenius_distance, gate_matrix, haar_random_state, haar_random_unitary, measure_qubit,
    GateKind, StateVector, C64,
};
use crate::rng_from_seed;

/// One measured-versus-expected check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    fn within(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (measured - expected).abs() <= tolerance;
        Self { name: name.into(), measured, expected, tolerance, passed }
    }

    fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, expected: 0.0, tolerance: bound, passed: measured <= bound }
    }
}

fn random_gate<R: Rng>(rng: &mut R, num_qubits: usize) -> (GateKind, usize, Option<usize>) {
    let angle = rng.random_range(-PI..=PI);
    let two_qubit = num_qubits > 1 && rng.random_bool(0.5);
    let target = rng.random_range(0..num_qubits);
    if two_qubit {
        let mut control = rng.random_range(0..num_qubits - 1);
        if control >= target {
            control += 1;
        }
        let kind = if rng.random_bool(0.5) { GateKind::Cx } else { GateKind::CPhase(angle) };
        (kind, target, Some(control))
    } else {
        let kind = if rng.random_bool(0.5) { GateKind::Rx(angle) } else { GateKind::Phase(angle) };
        (kind, target, None)
    }
}

/// Largest amplitude deviation between the gate kernel and the embedded
/// full matrix over `cases` random (gate, state) pairs on 1 to 3 qubits.
pub fn apply_vs_embed(cases: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for case in 0..cases {
        let n = 1 + case % 3;
        let state = haar_random_state(n, rng.random())?;
        let (kind, target, control) = random_gate(&mut rng, n);
        let fast = apply_gate(&state, kind, target, control)?;
        let full = embed_unitary(&gate_matrix(kind), target, control, n)?.apply_to(state.amplitudes());
        for (a, b) in fast.amplitudes().iter().zip(&full) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(OracleReport::at_most(format!("apply_gate vs embedded matrix ({cases} cases)"), worst, 1e-10))
}

/// Mean of `|<0..0|U|0..0>|^2` over Haar samples; expected `1/2^n`.
pub fn haar_unitary_overlap(num_qubits: usize, samples: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    for _ in 0..samples {
        sum += haar_random_unitary(num_qubits, rng.random())?[(0, 0)].norm_sqr();
    }
    let expected = 1.0 / (1u64 << num_qubits) as f64;
    Ok(OracleReport::within(
        format!("Haar unitary mean |U00|^2, {num_qubits} qubits, {samples} samples"),
        sum / samples as f64,
        expected,
        0.02,
    ))
}

/// Mean fidelity of Haar states to `|0..0>`; expected `1/2^n`.
pub fn haar_state_overlap(num_qubits: usize, samples: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    for _ in 0..samples {
        sum += haar_random_state(num_qubits, rng.random())?.amplitudes()[0].norm_sqr();
    }
    let expected = 1.0 / (1u64 << num_qubits) as f64;
    Ok(OracleReport::within(
        format!("Haar state mean fidelity to |0..0>, {num_qubits} qubits, {samples} samples"),
        sum / samples as f64,
        expected,
        0.02,
    ))
}

/// Frequency of outcome 0 when measuring `|+>`; expected 0.5.
pub fn born_frequency(trials: usize, seed: u64) -> Result<OracleReport> {
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let plus = StateVector::from_amplitudes(alloc::vec![r, r])?;
    let mut rng = rng_from_seed(seed);
    let mut zeros = 0usize;
    for _ in 0..trials {
        if measure_qubit(&plus, 0, &mut rng)?.0 == 0 {
            zeros += 1;
        }
    }
    Ok(OracleReport::within(
        format!("Born frequency of 0 on |+>, {trials} trials"),
        zeros as f64 / trials as f64,
        0.5,
        0.03,
    ))
}

/// Random batch of trajectories for gradient checks.
pub fn random_batch(observation_len: usize, trajectories: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = rng_from_seed(seed);
    (0..trajectories)
        .map(|_| {
            let len = rng.random_range(1..=5);
            let steps = (0..len)
                .map(|_| {
                    let observation = (0..observation_len).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let latent = [(); 4].map(|_| rng.random_range(-2.0..2.0));
                    let action = Action::from_array(latent.map(|u: f64| u.tanh()));
                    Transition { observation, decision: Decision { action, latent }, reward: rng.random_range(-1.0..1.0) }
                })
                .collect();
            Trajectory { steps }
        })
        .collect()
}

/// Relative error `||g - g_fd|| / max(||g||, ||g_fd||)` between the
/// backpropagated gradient and central finite differences of the objective,
/// over `coords` randomly chosen parameters of a freshly randomised policy.
pub fn reinforce_gradient_check(trajectories: usize, coords: usize, seed: u64) -> Result<OracleReport> {
    let obs_len = 8;
    let cfg = ReinforceConfig { seed, ..ReinforceConfig::default() };
    let mut policy = ReinforcePolicy::new(obs_len, cfg)?;
    let mut rng = rng_from_seed(seed ^ 0x5EED);
    for p in policy.params_mut() {
        *p = rng.random_range(-0.3..0.3);
    }
    let batch = random_batch(obs_len, trajectories, seed);
    let analytic = policy.gradient(&batch)?;
    let h = 1e-5;
    let mut diff_sq = 0.0;
    let mut a_sq = 0.0;
    let mut fd_sq = 0.0;
    let n_params = analytic.len();
    for _ in 0..coords.min(n_params) {
        let i = rng.random_range(0..n_params);
        let orig = policy.params()[i];
        policy.params_mut()[i] = orig + h;
        let up = policy.objective(&batch)?;
        policy.params_mut()[i] = orig - h;
        let down = policy.objective(&batch)?;
        policy.params_mut()[i] = orig;
        let fd = (up - down) / (2.0 * h);
        diff_sq += (fd - analytic[i]).powi(2);
        a_sq += analytic[i].powi(2);
        fd_sq += fd * fd;
    }
    let scale = a_sq.sqrt().max(fd_sq.sqrt());
    if scale == 0.0 {
        bail!(InvalidState, "gradient check degenerate: zero gradient");
    }
    Ok(OracleReport::at_most(
        format!("REINFORCE gradient vs finite differences ({trajectories} trajectories, {coords} coords)"),
        diff_sq.sqrt() / scale,
        1e-4,
    ))
}

/// Certificate run for a named challenge: the scripted exact sequence,
/// checked at its terminal state.
///
/// SP challenges report final fidelity (expected 1), UC challenges report
/// the squared Frobenius distance (expected 0). The register usage is
/// appended as a second report.
pub fn certificate(spec_text: &str) -> Result<Vec<OracleReport>> {
    let spec = parse_challenge_spec(spec_text)?;
    let script = match spec.target {
        crate::challenge::TargetName::Bell => "bell",
        crate::challenge::TargetName::Ghz => "ghz",
        crate::challenge::TargetName::Hadamard => "hadamard",
        crate::challenge::TargetName::Toffoli => "toffoli",
        other => bail!(InvalidConfig, "no certificate sequence for {} targets", other.as_str()),
    };
    let mut env = CircuitDesigner::new(EnvConfig::from_spec(&spec, 0)?)?;
    let mut policy = ScriptedPolicy::new(script, spec.num_qubits)?;
    let (_, metrics) = run_episode(&mut policy, &mut env, &mut rng_from_seed(0), false)?;
    let main = match env.challenge().target() {
        Target::State(t) => {
            OracleReport::within(format!("{spec_text} certificate fidelity"), crate::quantum::fidelity(env.state(), t)?, 1.0, 1e-9)
        }
        Target::Unitary(u) => OracleReport::at_most(
            format!("{spec_text} certificate Frobenius distance"),
            frobenius_distance(u, &env.circuit().composed_unitary()?)?,
            1e-10,
        ),
    };
    let qubits = OracleReport::within(
        format!("{spec_text} certificate qubits used"),
        metrics.qubits_used as f64,
        spec.num_qubits as f64,
        0.0,
    );
    Ok(alloc::vec![main, qubits])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_oracles_pass() {
        assert!(apply_vs_embed(60, 1).unwrap().passed);
        assert!(born_frequency(2000, 2).unwrap().passed);
        assert!(haar_unitary_overlap(1, 2000, 4).unwrap().passed);
        assert!(haar_state_overlap(2, 2000, 5).unwrap().passed);
        let g = reinforce_gradient_check(10, 40, 3).unwrap();
        assert!(g.passed, "{g:?}");
        for spec in ["SP-bell", "SP-ghz", "UC-hadamard", "UC-toffoli"] {
            assert!(certificate(spec).unwrap().iter().all(|r| r.passed), "{spec}");
        }
        assert!(certificate("SP-random").is_err());
    }
}
