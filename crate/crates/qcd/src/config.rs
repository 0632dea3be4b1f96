//! Run configuration: TOML file values overridden by command-line flags.
//!
//! ```toml
//! challenge = "SP-bell"
//! agent = "reinforce"
//! seeds = [0, 1, 2, 3]
//! steps = 200000
//! out = "runs/bell"
//!
//! [env]
//! cost = "ramp"          # or "late"
//! resample_target = false
//!
//! [reinforce]
//! hidden = 64
//! learning_rate = 3e-4
//! gamma = 0.99
//! entropy_coef = 0.01
//! batch_episodes = 16
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use qcd_core::agents::ReinforceConfig;
use qcd_core::challenge::{parse_challenge_spec, ChallengeSpec};
use qcd_core::env::CostSchedule;
use serde::Deserialize;

pub const DEFAULT_SEEDS: [u64; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
pub const DEFAULT_STEPS: usize = 200_000;
pub const DEFAULT_OUT: &str = "qcd-out";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentKind {
    Random,
    Reinforce,
    Scripted(String),
}

impl FromStr for AgentKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "reinforce" => Ok(Self::Reinforce),
            _ => match s.strip_prefix("scripted:") {
                Some(name) if !name.is_empty() => Ok(Self::Scripted(name.to_string())),
                _ => bail!("unknown agent `{s}` (expected random, reinforce or scripted:<name>)"),
            },
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random => f.write_str("random"),
            Self::Reinforce => f.write_str("reinforce"),
            Self::Scripted(name) => write!(f, "scripted:{name}"),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvSection {
    cost: Option<String>,
    resample_target: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReinforceSection {
    hidden: Option<usize>,
    learning_rate: Option<f64>,
    gamma: Option<f64>,
    entropy_coef: Option<f64>,
    batch_episodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptySection {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    challenge: Option<String>,
    agent: Option<String>,
    seeds: Option<Vec<u64>>,
    steps: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    env: EnvSection,
    #[serde(default)]
    reinforce: ReinforceSection,
    // accepted so every agent can have a section, but they take no keys yet
    #[serde(default, rename = "random")]
    _random: EmptySection,
    #[serde(default, rename = "scripted")]
    _scripted: EmptySection,
}

/// Values given on the command line; `None` leaves the file value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub challenge: Option<String>,
    pub agent: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub challenge: ChallengeSpec,
    pub agent: AgentKind,
    /// Explicitly configured seeds; commands pick their own default.
    pub seeds: Option<Vec<u64>>,
    pub total_steps: usize,
    pub out: PathBuf,
    pub cost: CostSchedule,
    pub resample_target: bool,
    /// Hyperparameters; the seed field is replaced per run.
    pub reinforce: ReinforceConfig,
}

impl RunConfig {
    pub fn seeds_or(&self, default: &[u64]) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn load(overrides: &Overrides, default_agent: AgentKind) -> anyhow::Result<Self> {
        let file = match &overrides.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let challenge_text = overrides.challenge.clone().or(file.challenge).unwrap_or_else(|| "SP-bell".into());
        let challenge = parse_challenge_spec(&challenge_text).map_err(|e| anyhow::anyhow!("challenge `{challenge_text}`: {e}"))?;
        let agent = match overrides.agent.clone().or(file.agent) {
            Some(a) => a.parse()?,
            None => default_agent,
        };
        let seeds = overrides.seeds.clone().or(file.seeds);
        if seeds.as_ref().is_some_and(|s| s.is_empty()) {
            bail!("at least one seed is required");
        }
        let total_steps = overrides.steps.or(file.steps).unwrap_or(DEFAULT_STEPS);
        if total_steps == 0 {
            bail!("steps must be at least 1");
        }
        let cost = match file.env.cost.as_deref() {
            None | Some("ramp") => CostSchedule::Ramp,
            Some("late") => CostSchedule::LateRamp,
            Some(other) => bail!("unknown cost schedule `{other}` (expected ramp or late)"),
        };
        let d = ReinforceConfig::default();
        let r = file.reinforce;
        let reinforce = ReinforceConfig {
            hidden: r.hidden.unwrap_or(d.hidden),
            learning_rate: r.learning_rate.unwrap_or(d.learning_rate),
            gamma: r.gamma.unwrap_or(d.gamma),
            entropy_coef: r.entropy_coef.unwrap_or(d.entropy_coef),
            batch_episodes: r.batch_episodes.unwrap_or(d.batch_episodes),
            seed: d.seed,
        };
        reinforce.validate()?;
        Ok(Self {
            challenge,
            agent,
            seeds,
            total_steps,
            out: overrides.out.clone().or(file.out).unwrap_or_else(|| DEFAULT_OUT.into()),
            cost,
            resample_target: file.env.resample_target.unwrap_or(false),
            reinforce,
        })
    }
}

fn read_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Seeds as a comma list (`0,3,5`) or a half-open range (`0..8`).
pub fn parse_seeds(text: &str) -> anyhow::Result<Vec<u64>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a >= b {
            bail!("empty seed range `{text}`");
        }
        return Ok((a..b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed `{s}`")))
        .collect()
}
