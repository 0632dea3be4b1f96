//! Baseline agents, episode rollout and the evaluation metrics.
//!
//! Metrics follow the benchmark convention: per-episode undiscounted return,
//! qubits used and circuit depth of the final circuit, smoothed by a plain
//! arithmetic mean over the last 100 episodes.

mod random;
mod reinforce;
mod scripted;

pub use random::{random_action, RandomPolicy};
pub use reinforce::{
    discounted_returns, gaussian_log_density, squashed_density, squashed_log_prob, Diagnostics, Mlp, ReinforceConfig,
    ReinforcePolicy, LOG_STD_MAX, LOG_STD_MIN,
};
pub use scripted::ScriptedPolicy;

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::Rng;

#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::env::{Action, Environment};
use crate::error::{bail, Result};
use crate::SimRng;

/// Width of the smoothing window.
pub const WINDOW: usize = 100;

/// An action together with the pre-squash sample it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub action: Action,
    /// Unbounded Gaussian sample; equals the action for policies without squashing.
    pub latent: [f64; 4],
}

impl From<Action> for Decision {
    fn from(action: Action) -> Self {
        Self { action, latent: action.components() }
    }
}

pub trait Policy {
    /// Choose an action. `explore` selects stochastic sampling over the
    /// policy's deterministic mode where the two differ.
    fn act(&mut self, observation: &[f64], explore: bool, rng: &mut SimRng) -> Decision;

    /// Called before the first step of every episode.
    fn begin_episode(&mut self) {}

    /// Learn from a batch of complete episodes. Non-learning policies ignore it.
    fn update(&mut self, _batch: &[Trajectory]) -> Result<Option<Diagnostics>> {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub decision: Decision,
    pub reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    /// Undiscounted sum of rewards.
    pub total_return: f64,
    pub qubits_used: usize,
    pub depth: usize,
    pub length: usize,
}

/// Ring buffer over the last [`WINDOW`] episodes.
#[derive(Debug, Clone, Default)]
pub struct MetricsWindow {
    episodes: VecDeque<EpisodeMetrics>,
}

impl MetricsWindow {
    pub fn new() -> Self {
        Self { episodes: VecDeque::with_capacity(WINDOW) }
    }

    pub fn push(&mut self, m: EpisodeMetrics) {
        if self.episodes.len() == WINDOW {
            self.episodes.pop_front();
        }
        self.episodes.push_back(m);
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    fn mean_of(&self, f: impl Fn(&EpisodeMetrics) -> f64) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(f).sum::<f64>() / self.episodes.len() as f64
    }

    pub fn mean_return(&self) -> f64 {
        self.mean_of(|m| m.total_return)
    }

    pub fn mean_qubits(&self) -> f64 {
        self.mean_of(|m| m.qubits_used as f64)
    }

    pub fn mean_depth(&self) -> f64 {
        self.mean_of(|m| m.depth as f64)
    }

    pub fn mean_length(&self) -> f64 {
        self.mean_of(|m| m.length as f64)
    }
}

/// Reset `env` with a seed drawn from `rng`, then step until the episode ends.
pub fn run_episode<P, E>(policy: &mut P, env: &mut E, rng: &mut SimRng, explore: bool) -> Result<(Trajectory, EpisodeMetrics)>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
{
    let mut observation = env.reset(rng.random())?;
    policy.begin_episode();
    let mut trajectory = Trajectory::default();
    let mut metrics = EpisodeMetrics { total_return: 0.0, qubits_used: 0, depth: 0, length: 0 };
    loop {
        let decision = policy.act(&observation, explore, rng);
        let result = env.step(&decision.action)?;
        metrics.total_return += result.reward;
        metrics.length += 1;
        metrics.depth = result.info.depth;
        metrics.qubits_used = result.info.qubits_used;
        trajectory.steps.push(Transition { observation, decision, reward: result.reward });
        if result.done() {
            break;
        }
        if metrics.length >= env.max_steps() {
            bail!(InvalidState, "environment ran past its step budget of {}", env.max_steps());
        }
        observation = result.observation;
    }
    Ok((trajectory, metrics))
}

/// Mean metrics over a fixed number of evaluation episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub episodes: usize,
    pub mean_return: f64,
    pub mean_qubits: f64,
    pub mean_depth: f64,
    pub mean_length: f64,
}

/// Run `episodes` episodes without learning; deterministic per `seed`.
pub fn evaluate<P, E>(policy: &mut P, env: &mut E, episodes: usize, seed: u64, explore: bool) -> Result<Summary>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
{
    if episodes == 0 {
        bail!(InvalidArgument, "evaluation needs at least one episode");
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut all = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        all.push(run_episode(policy, env, &mut rng, explore)?.1);
    }
    let mean = |f: &dyn Fn(&EpisodeMetrics) -> f64| all.iter().map(f).sum::<f64>() / episodes as f64;
    Ok(Summary {
        episodes,
        mean_return: mean(&|m| m.total_return),
        mean_qubits: mean(&|m| m.qubits_used as f64),
        mean_depth: mean(&|m| m.depth as f64),
        mean_length: mean(&|m| m.length as f64),
    })
}

/// Mean and 95% confidence half-width (normal approximation, sample
/// standard deviation) of per-seed values. One value gives a half-width of 0.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, 1.96 * (var / n as f64).sqrt())
}

/// One finished training episode, as reported to the progress callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeReport {
    /// Environment steps taken so far, including this episode.
    pub global_step: usize,
    /// 0-based episode index.
    pub episode: usize,
    pub metrics: EpisodeMetrics,
    pub mean_return: f64,
    pub mean_qubits: f64,
    pub mean_depth: f64,
}

/// Collect batches of `batch_episodes` episodes and hand each to
/// [`Policy::update`] until `total_steps` environment steps have been taken.
///
/// The last batch is cut short when the budget runs out and still updates
/// the policy. Returns the final smoothing window.
pub fn train<P, E, F>(
    policy: &mut P,
    env: &mut E,
    total_steps: usize,
    batch_episodes: usize,
    seed: u64,
    mut on_episode: F,
) -> Result<MetricsWindow>
where
    P: Policy + ?Sized,
    E: Environment + ?Sized,
    F: FnMut(&EpisodeReport),
{
    if total_steps == 0 || batch_episodes == 0 {
        bail!(InvalidArgument, "training needs a positive step budget and batch size");
    }
    let mut rng = crate::rng_from_seed(seed);
    let mut window = MetricsWindow::new();
    let mut global_step = 0;
    let mut episode = 0;
    let mut batch = Vec::with_capacity(batch_episodes);
    while global_step < total_steps {
        batch.clear();
        while batch.len() < batch_episodes && global_step < total_steps {
            let (trajectory, metrics) = run_episode(policy, env, &mut rng, true)?;
            global_step += metrics.length;
            window.push(metrics);
            on_episode(&EpisodeReport {
                global_step,
                episode,
                metrics,
                mean_return: window.mean_return(),
                mean_qubits: window.mean_qubits(),
                mean_depth: window.mean_depth(),
            });
            episode += 1;
            batch.push(trajectory);
        }
        policy.update(&batch)?;
    }
    Ok(window)
}
