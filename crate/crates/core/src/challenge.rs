//! Challenge registry: State Preparation (SP) and Unitary Composition (UC).
//!
//! Named instances and their device limits `(qubits, max depth)`:
//!
//! | spec           | target                    | qubits | depth |
//! |----------------|---------------------------|--------|-------|
//! | `SP-bell`      | `(|00> + |11>)/sqrt 2`    | 2      | 12    |
//! | `SP-random`    | Haar-random state         | 2      | 12    |
//! | `SP-ghz`       | `(|000> + |111>)/sqrt 2`  | 3      | 15    |
//! | `UC-hadamard`  | `H`                       | 1      | 9     |
//! | `UC-random`    | Haar-random unitary       | 2      | 12    |
//! | `UC-toffoli`   | `CCX` (controls 0, 1)     | 3      | 63    |
//!
//! Spec strings accept `:key=value,...` overrides for `eta`, `delta`, `seed`
//! and `path`. `custom` targets are loaded from a file by the `qcd` crate and
//! attached with [`Challenge::with_target`].

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::circuit::Circuit;
use crate::error::{bail, Error, Result};
use crate::quantum::{
    fidelity, frobenius_distance, haar_random_state, haar_random_unitary, hadamard, toffoli, Matrix, StateVector, C64,
    MAX_QUBITS, MAX_UNITARY_QUBITS, TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// State Preparation.
    Sp,
    /// Unitary Composition.
    Uc,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Sp => "SP",
            Family::Uc => "UC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetName {
    Bell,
    Ghz,
    Random,
    Hadamard,
    Toffoli,
    Custom,
}

impl TargetName {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetName::Bell => "bell",
            TargetName::Ghz => "ghz",
            TargetName::Random => "random",
            TargetName::Hadamard => "hadamard",
            TargetName::Toffoli => "toffoli",
            TargetName::Custom => "custom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bell" => TargetName::Bell,
            "ghz" => TargetName::Ghz,
            "random" => TargetName::Random,
            "hadamard" => TargetName::Hadamard,
            "toffoli" => TargetName::Toffoli,
            "custom" => TargetName::Custom,
            _ => return None,
        })
    }

    /// Qubit count fixed by the target itself, if any.
    fn fixed_qubits(&self) -> Option<usize> {
        match self {
            TargetName::Bell => Some(2),
            TargetName::Ghz | TargetName::Toffoli => Some(3),
            TargetName::Hadamard => Some(1),
            TargetName::Random | TargetName::Custom => None,
        }
    }
}

/// A challenge instance before its target is materialised.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChallengeSpec {
    pub family: Family,
    pub target: TargetName,
    /// Register size. For `custom` targets without an `eta` override this is 0
    /// until the target file is attached.
    pub num_qubits: usize,
    pub max_depth: usize,
    /// Seed for random targets; the environment seed is used when absent.
    pub seed: Option<u64>,
    pub custom_path: Option<String>,
}

impl ChallengeSpec {
    /// One of the six named instances with its default limits.
    pub fn named(family: Family, target: TargetName) -> Result<Self> {
        let (num_qubits, max_depth) = match (family, target) {
            (Family::Sp, TargetName::Bell) => (2, 12),
            (Family::Sp, TargetName::Random) => (2, 12),
            (Family::Sp, TargetName::Ghz) => (3, 15),
            (Family::Uc, TargetName::Hadamard) => (1, 9),
            (Family::Uc, TargetName::Random) => (2, 12),
            (Family::Uc, TargetName::Toffoli) => (3, 63),
            (_, TargetName::Custom) => (0, DEFAULT_CUSTOM_DEPTH),
            _ => bail!(InvalidConfig, "{}-{} is not a known challenge", family.as_str(), target.as_str()),
        };
        Ok(Self { family, target, num_qubits, max_depth, seed: None, custom_path: None })
    }

    fn qubit_cap(&self) -> usize {
        match self.family {
            Family::Sp => MAX_QUBITS,
            Family::Uc => MAX_UNITARY_QUBITS,
        }
    }

    /// The six instances benchmarked by default.
    pub fn benchmark_suite() -> [ChallengeSpec; 6] {
        use {Family::*, TargetName::*};
        [(Sp, Bell), (Sp, Random), (Sp, Ghz), (Uc, Hadamard), (Uc, Random), (Uc, Toffoli)]
            .map(|(f, t)| ChallengeSpec::named(f, t).expect("named instance"))
    }
}

/// Default depth budget for custom targets.
pub const DEFAULT_CUSTOM_DEPTH: usize = 12;

impl fmt::Display for ChallengeSpec {
    /// Canonical spec string; parses back to an equal value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}:eta={},delta={}", self.family.as_str(), self.target.as_str(), self.num_qubits, self.max_depth)?;
        if let Some(seed) = self.seed {
            write!(f, ",seed={seed}")?;
        }
        if let Some(path) = &self.custom_path {
            write!(f, ",path={path}")?;
        }
        Ok(())
    }
}

fn parse_err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse { position, message: message.into() }
}

/// Parse `SP-<name>` / `UC-<name>` with optional `:eta=..,delta=..,seed=..,path=..`.
///
/// Error positions are byte offsets into `text`.
pub fn parse_challenge_spec(text: &str) -> Result<ChallengeSpec> {
    let (head, overrides) = match text.find(':') {
        Some(i) => (&text[..i], Some((i + 1, &text[i + 1..]))),
        None => (text, None),
    };
    let Some(dash) = head.find('-') else {
        return Err(parse_err(0, "expected <SP|UC>-<name>"));
    };
    let family = match &head[..dash] {
        "SP" => Family::Sp,
        "UC" => Family::Uc,
        other => return Err(parse_err(0, alloc::format!("unknown family {other:?}, expected SP or UC"))),
    };
    let name_pos = dash + 1;
    let target = TargetName::parse(&head[name_pos..])
        .ok_or_else(|| parse_err(name_pos, alloc::format!("unknown target {:?}", &head[name_pos..])))?;
    let mut spec = ChallengeSpec::named(family, target).map_err(|e| parse_err(name_pos, error_message(e)))?;

    let mut eta_override = None;
    if let Some((mut pos, rest)) = overrides {
        for item in rest.split(',') {
            let Some(eq) = item.find('=') else {
                return Err(parse_err(pos, alloc::format!("expected key=value, got {item:?}")));
            };
            let (key, value) = (&item[..eq], &item[eq + 1..]);
            let vpos = pos + eq + 1;
            let number = |v: &str| -> Result<u64> {
                v.parse::<u64>().map_err(|_| parse_err(vpos, alloc::format!("{key} expects an unsigned integer, got {v:?}")))
            };
            match key {
                "eta" => eta_override = Some((number(value)? as usize, vpos)),
                "delta" => {
                    let d = number(value)? as usize;
                    if d == 0 {
                        return Err(parse_err(vpos, "delta must be at least 1"));
                    }
                    spec.max_depth = d;
                }
                "seed" => spec.seed = Some(number(value)?),
                "path" => {
                    if value.is_empty() {
                        return Err(parse_err(vpos, "empty path"));
                    }
                    spec.custom_path = Some(value.to_owned());
                }
                other => return Err(parse_err(pos, alloc::format!("unknown key {other:?}"))),
            }
            pos += item.len() + 1;
        }
    }

    if let Some((eta, vpos)) = eta_override {
        if let Some(fixed) = target.fixed_qubits() {
            if eta != fixed {
                return Err(parse_err(vpos, alloc::format!("{} needs eta={fixed}, got {eta}", target.as_str())));
            }
        }
        if eta == 0 || eta > spec.qubit_cap() {
            return Err(parse_err(vpos, alloc::format!("eta must be in 1..={}, got {eta}", spec.qubit_cap())));
        }
        spec.num_qubits = eta;
    }
    if target == TargetName::Custom && spec.custom_path.is_none() {
        return Err(parse_err(text.len(), "custom target needs path=<file>"));
    }
    if target != TargetName::Custom && spec.custom_path.is_some() {
        return Err(parse_err(text.len(), "path is only valid for custom targets"));
    }
    Ok(spec)
}

fn error_message(e: Error) -> String {
    alloc::format!("{e}")
}

impl FromStr for ChallengeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_challenge_spec(s)
    }
}

/// A materialised target.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    State(StateVector),
    Unitary(Matrix),
}

impl Target {
    pub fn num_qubits(&self) -> usize {
        match self {
            Target::State(s) => s.num_qubits(),
            Target::Unitary(u) => u.num_qubits(),
        }
    }
}

/// Named SP targets. `custom` is not resolvable here.
pub fn target_state(name: TargetName, num_qubits: usize, seed: u64) -> Result<StateVector> {
    if let Some(fixed) = name.fixed_qubits() {
        if fixed != num_qubits {
            bail!(InvalidConfig, "{} is a {fixed}-qubit target, got {num_qubits} qubits", name.as_str());
        }
    }
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    match name {
        TargetName::Bell => StateVector::from_amplitudes(vec![r, z, z, r]),
        TargetName::Ghz => StateVector::from_amplitudes(vec![r, z, z, z, z, z, z, r]),
        TargetName::Random => haar_random_state(num_qubits, seed),
        other => bail!(InvalidConfig, "{} is not a state target", other.as_str()),
    }
}

/// Named UC targets. `custom` is not resolvable here.
pub fn target_unitary(name: TargetName, num_qubits: usize, seed: u64) -> Result<Matrix> {
    if let Some(fixed) = name.fixed_qubits() {
        if fixed != num_qubits {
            bail!(InvalidConfig, "{} is a {fixed}-qubit target, got {num_qubits} qubits", name.as_str());
        }
    }
    match name {
        TargetName::Hadamard => Ok(hadamard()),
        TargetName::Toffoli => Ok(toffoli()),
        TargetName::Random => haar_random_unitary(num_qubits, seed),
        other => bail!(InvalidConfig, "{} is not a unitary target", other.as_str()),
    }
}

/// Terminal fidelity to the target, 0 before the end.
pub fn sp_reward(state: &StateVector, target: &StateVector, is_final: bool) -> Result<f64> {
    let f = fidelity(state, target)?;
    Ok(if is_final { f } else { 0.0 })
}

/// `1 - atan(||U - V||_F^2)` at the end, 0 before.
///
/// Not confined to `[0, 1]`: it drops below 0 once the squared distance
/// exceeds `tan 1`, down to `1 - pi/2` in the limit.
pub fn uc_reward(circuit_unitary: &Matrix, target: &Matrix, is_final: bool) -> Result<f64> {
    let d = frobenius_distance(target, circuit_unitary)?;
    Ok(if is_final { 1.0 - d.atan() } else { 0.0 })
}

/// A challenge with its materialised target.
#[derive(Debug, Clone, PartialEq)]
pub struct Challenge {
    spec: ChallengeSpec,
    target: Target,
}

impl Challenge {
    /// Materialise a named challenge. Random targets use `spec.seed`, falling
    /// back to `default_seed`.
    pub fn from_spec(spec: &ChallengeSpec, default_seed: u64) -> Result<Self> {
        let seed = spec.seed.unwrap_or(default_seed);
        if spec.num_qubits == 0 || spec.num_qubits > spec.qubit_cap() {
            bail!(InvalidConfig, "{spec} needs 1..={} qubits", spec.qubit_cap());
        }
        let target = match spec.family {
            Family::Sp => Target::State(target_state(spec.target, spec.num_qubits, seed)?),
            Family::Uc => Target::Unitary(target_unitary(spec.target, spec.num_qubits, seed)?),
        };
        Ok(Self { spec: spec.clone(), target })
    }

    /// Attach an externally supplied target (custom challenges).
    ///
    /// The target kind must match the family. A spec with `num_qubits == 0`
    /// takes the target's register size; otherwise the two must agree.
    pub fn with_target(spec: &ChallengeSpec, target: Target) -> Result<Self> {
        let mut spec = spec.clone();
        match (&spec.family, &target) {
            (Family::Sp, Target::State(s)) => {
                if (s.norm_sqr() - 1.0).abs() > TOL {
                    bail!(InvalidConfig, "target state is not normalised");
                }
            }
            (Family::Uc, Target::Unitary(u)) => {
                if !u.dim().is_power_of_two() || u.dim() < 2 || u.num_qubits() > MAX_UNITARY_QUBITS {
                    bail!(InvalidConfig, "target unitary has unsupported dimension {}", u.dim());
                }
                if !u.is_unitary(TOL) {
                    bail!(InvalidConfig, "target matrix is not unitary within 1e-9");
                }
            }
            (Family::Sp, _) => bail!(InvalidConfig, "SP challenge needs a state target"),
            (Family::Uc, _) => bail!(InvalidConfig, "UC challenge needs a unitary target"),
        }
        let n = target.num_qubits();
        if spec.num_qubits == 0 {
            spec.num_qubits = n;
        } else if spec.num_qubits != n {
            bail!(InvalidConfig, "{spec} expects {} qubits but the target has {n}", spec.num_qubits);
        }
        Ok(Self { spec, target })
    }

    pub fn spec(&self) -> &ChallengeSpec {
        &self.spec
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn num_qubits(&self) -> usize {
        self.spec.num_qubits
    }

    pub fn max_depth(&self) -> usize {
        self.spec.max_depth
    }

    /// Task reward `R*` for the current episode: SP scores the state, UC the
    /// circuit's composed unitary (measurements do not enter it).
    pub fn reward(&self, state: &StateVector, circuit: &Circuit, is_final: bool) -> Result<f64> {
        if !is_final {
            return Ok(0.0);
        }
        match &self.target {
            Target::State(t) => sp_reward(state, t, true),
            Target::Unitary(u) => uc_reward(&circuit.composed_unitary()?, u, true),
        }
    }
}
