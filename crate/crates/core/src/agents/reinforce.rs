//! Monte-Carlo policy gradient with a tanh-squashed diagonal Gaussian head.
//!
//! The network maps an observation through two tanh hidden layers to four
//! means and four log standard deviations (clamped to `[LOG_STD_MIN,
//! LOG_STD_MAX]`). A latent `u ~ N(mean, std^2)` is squashed to the action
//! `tanh(u)`, so every emitted action lies in `[-1, 1]^4`.
//!
//! Updates ascend
//!
//! ```text
//! J = 1/N sum_t (G_t - b) log pi(u_t | s_t) + beta/N sum_t H(s_t)
//! ```
//!
//! over all `N` steps of a batch, where `G_t = sum_k gamma^(t+k) r_(t+k)`,
//! `b` is the batch mean of `G_t` and `H` is the entropy of the unsquashed
//! Gaussian. Steps are taken with Adam.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, TAU};

use rand::Rng;

use super::{Decision, Policy, Trajectory};
#[allow(unused_imports)] // shadowed by inherent methods whenever std is linked
use num_traits::Float;

use crate::env::Action;
use crate::error::{bail, Result};
use crate::quantum::standard_normal;
use crate::{rng_from_seed, SimRng};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;
const ACTION_DIM: usize = 4;
const HEAD_DIM: usize = 2 * ACTION_DIM;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReinforceConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub entropy_coef: f64,
    /// Episodes per update.
    pub batch_episodes: usize,
    /// Seed for parameter initialisation.
    pub seed: u64,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        Self { hidden: 64, learning_rate: 3e-4, gamma: 0.99, entropy_coef: 0.01, batch_episodes: 16, seed: 0 }
    }
}

impl ReinforceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            bail!(InvalidConfig, "hidden width must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            bail!(InvalidConfig, "learning rate must be positive, got {}", self.learning_rate);
        }
        if !(0.0..1.0).contains(&self.gamma) {
            bail!(InvalidConfig, "gamma must lie in [0, 1), got {}", self.gamma);
        }
        if !(self.entropy_coef >= 0.0 && self.entropy_coef.is_finite()) {
            bail!(InvalidConfig, "entropy coefficient must be non-negative, got {}", self.entropy_coef);
        }
        if self.batch_episodes == 0 {
            bail!(InvalidConfig, "batch must hold at least one episode");
        }
        Ok(())
    }
}

/// Fully connected `in -> hidden -> hidden -> out` network with tanh hidden
/// activations and a linear output. Parameters are stored flat, layer by
/// layer, each as a row-major weight matrix followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: [usize; 4],
    params: Vec<f64>,
}

struct Activations {
    h1: Vec<f64>,
    h2: Vec<f64>,
    out: Vec<f64>,
}

fn param_count(sizes: &[usize; 4]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn dense(params: &[f64], input: &[f64], out_dim: usize, act: bool) -> Vec<f64> {
    let in_dim = input.len();
    let (w, b) = params.split_at(in_dim * out_dim);
    (0..out_dim)
        .map(|o| {
            let z = w[o * in_dim..(o + 1) * in_dim].iter().zip(input).map(|(a, x)| a * x).sum::<f64>() + b[o];
            if act {
                z.tanh()
            } else {
                z
            }
        })
        .collect()
}

impl Mlp {
    /// Uniform `+-1/sqrt(fan_in)` initialisation, output layer shrunk by 100
    /// so the initial policy is close to `N(0, 1)` on every latent dimension.
    pub fn new(input: usize, hidden: usize, output: usize, seed: u64) -> Self {
        let sizes = [input, hidden, hidden, output];
        let mut rng = rng_from_seed(seed);
        let mut params = Vec::with_capacity(param_count(&sizes));
        for (layer, w) in sizes.windows(2).enumerate() {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let scale = if layer == 2 { 0.01 } else { 1.0 };
            for _ in 0..w[0] * w[1] {
                params.push(scale * rng.random_range(-bound..bound));
            }
            params.extend(core::iter::repeat_n(0.0, w[1]));
        }
        Self { sizes, params }
    }

    pub fn from_params(input: usize, hidden: usize, output: usize, params: Vec<f64>) -> Result<Self> {
        let sizes = [input, hidden, hidden, output];
        if params.len() != param_count(&sizes) {
            bail!(InvalidArgument, "expected {} parameters, got {}", param_count(&sizes), params.len());
        }
        Ok(Self { sizes, params })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    fn offsets(&self) -> [usize; 3] {
        let s = &self.sizes;
        let l1 = s[0] * s[1] + s[1];
        let l2 = s[1] * s[2] + s[2];
        [0, l1, l1 + l2]
    }

    fn forward_cached(&self, x: &[f64]) -> Activations {
        let [o1, o2, o3] = self.offsets();
        let h1 = dense(&self.params[o1..o2], x, self.sizes[1], true);
        let h2 = dense(&self.params[o2..o3], &h1, self.sizes[2], true);
        let out = dense(&self.params[o3..], &h2, self.sizes[3], false);
        Activations { h1, h2, out }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).out
    }

    /// Accumulate `d out / d params` contracted with `d_out` into `grad`.
    fn backward(&self, x: &[f64], acts: &Activations, d_out: &[f64], grad: &mut [f64]) {
        let [o1, o2, o3] = self.offsets();
        let d_h2 = dense_backward(&self.params[o3..], &acts.h2, d_out, &mut grad[o3..]);
        let d_z2: Vec<f64> = d_h2.iter().zip(&acts.h2).map(|(d, h)| d * (1.0 - h * h)).collect();
        let d_h1 = dense_backward(&self.params[o2..o3], &acts.h1, &d_z2, &mut grad[o2..o3]);
        let d_z1: Vec<f64> = d_h1.iter().zip(&acts.h1).map(|(d, h)| d * (1.0 - h * h)).collect();
        dense_backward(&self.params[o1..o2], x, &d_z1, &mut grad[o1..o2]);
    }
}

/// Gradient of a dense layer given `d_z` (pre-activation); returns `d_input`.
fn dense_backward(params: &[f64], input: &[f64], d_z: &[f64], grad: &mut [f64]) -> Vec<f64> {
    let in_dim = input.len();
    let out_dim = d_z.len();
    let (w, _) = params.split_at(in_dim * out_dim);
    let (gw, gb) = grad.split_at_mut(in_dim * out_dim);
    let mut d_in = vec![0.0; in_dim];
    for o in 0..out_dim {
        let d = d_z[o];
        if d == 0.0 {
            continue;
        }
        gb[o] += d;
        let row = o * in_dim;
        for i in 0..in_dim {
            gw[row + i] += d * input[i];
            d_in[i] += d * w[row + i];
        }
    }
    d_in
}

/// `log N(u; mean, exp(log_std)^2)`.
pub fn gaussian_log_density(u: f64, mean: f64, log_std: f64) -> f64 {
    let z = (u - mean) * (-log_std).exp();
    -0.5 * z * z - log_std - 0.5 * (TAU).ln()
}

/// `log(1 - tanh(u)^2)`, stable for large `|u|`.
fn log_tanh_jacobian(u: f64) -> f64 {
    let softplus = |x: f64| if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

/// Log density of the squashed action `tanh(u)`, one dimension, evaluated at
/// the latent `u`: the Gaussian term minus the tanh change-of-variables term.
pub fn squashed_log_prob(u: f64, mean: f64, log_std: f64) -> f64 {
    gaussian_log_density(u, mean, log_std) - log_tanh_jacobian(u)
}

/// Density of `a = tanh(u)` at `a` in `(-1, 1)`, one dimension.
pub fn squashed_density(a: f64, mean: f64, log_std: f64) -> f64 {
    let u = a.atanh();
    squashed_log_prob(u, mean, log_std).exp()
}

/// Per-step returns `G_t = sum_k gamma^(t+k) r_(t+k)` with `t` counted from 0.
pub fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut to_go = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (t, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        to_go[t] = acc;
    }
    let mut discount = 1.0;
    for g in to_go.iter_mut() {
        *g *= discount;
        discount *= gamma;
    }
    to_go
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Euclidean norm of the objective gradient.
    pub grad_norm: f64,
    /// Mean per-step entropy of the unsquashed Gaussian.
    pub mean_entropy: f64,
    /// Mean undiscounted episode return of the batch.
    pub mean_return: f64,
    /// Surrogate objective before the step.
    pub objective: f64,
}

#[derive(Debug, Clone)]
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    /// Ascent step along `grad`.
    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p += lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// One batch step prepared for the objective: observation, latent and advantage.
struct Sample<'a> {
    observation: &'a [f64],
    latent: [f64; 4],
    advantage: f64,
}

#[derive(Debug, Clone)]
pub struct ReinforcePolicy {
    config: ReinforceConfig,
    net: Mlp,
    adam: Adam,
}

impl ReinforcePolicy {
    pub fn new(observation_len: usize, config: ReinforceConfig) -> Result<Self> {
        config.validate()?;
        if observation_len == 0 {
            bail!(InvalidConfig, "observation length must be positive");
        }
        let net = Mlp::new(observation_len, config.hidden, HEAD_DIM, config.seed);
        let adam = Adam::new(net.params().len());
        Ok(Self { config, net, adam })
    }

    /// Restore a policy from stored parameters (optimizer state starts fresh).
    pub fn from_params(observation_len: usize, config: ReinforceConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let net = Mlp::from_params(observation_len, config.hidden, HEAD_DIM, params)?;
        let adam = Adam::new(net.params().len());
        Ok(Self { config, net, adam })
    }

    pub fn config(&self) -> &ReinforceConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        self.net.params()
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        self.net.params_mut()
    }

    /// Means and clamped log standard deviations for an observation.
    pub fn distribution(&self, observation: &[f64]) -> ([f64; 4], [f64; 4]) {
        split_head(&self.net.forward(observation))
    }

    /// Log density of a squashed action given its latent.
    pub fn log_prob(&self, observation: &[f64], latent: &[f64; 4]) -> f64 {
        let (mean, log_std) = self.distribution(observation);
        (0..ACTION_DIM).map(|i| squashed_log_prob(latent[i], mean[i], log_std[i])).sum()
    }

    fn samples<'a>(&self, batch: &'a [Trajectory]) -> Result<Vec<Sample<'a>>> {
        if batch.is_empty() || batch.iter().any(|t| t.is_empty()) {
            bail!(InvalidArgument, "policy update needs at least one non-empty trajectory");
        }
        let mut out = Vec::new();
        for traj in batch {
            let rewards: Vec<f64> = traj.rewards().collect();
            let returns = discounted_returns(&rewards, self.config.gamma);
            for (step, g) in traj.steps.iter().zip(returns) {
                out.push(Sample { observation: &step.observation, latent: step.decision.latent, advantage: g });
            }
        }
        let baseline = out.iter().map(|s| s.advantage).sum::<f64>() / out.len() as f64;
        for s in out.iter_mut() {
            s.advantage -= baseline;
        }
        Ok(out)
    }

    /// Surrogate objective `J` for the current parameters (forward passes only).
    pub fn objective(&self, batch: &[Trajectory]) -> Result<f64> {
        let samples = self.samples(batch)?;
        let n = samples.len() as f64;
        let mut total = 0.0;
        for s in &samples {
            let (mean, log_std) = self.distribution(s.observation);
            for i in 0..ACTION_DIM {
                total += s.advantage * squashed_log_prob(s.latent[i], mean[i], log_std[i]);
                total += self.config.entropy_coef * gaussian_entropy(log_std[i]);
            }
        }
        Ok(total / n)
    }

    /// Analytic gradient of [`ReinforcePolicy::objective`] by backpropagation.
    pub fn gradient(&self, batch: &[Trajectory]) -> Result<Vec<f64>> {
        let samples = self.samples(batch)?;
        let n = samples.len() as f64;
        let mut grad = vec![0.0; self.net.params().len()];
        let mut d_out = [0.0; HEAD_DIM];
        for s in &samples {
            let acts = self.net.forward_cached(s.observation);
            let (mean, log_std) = split_head(&acts.out);
            for i in 0..ACTION_DIM {
                let inv_var = (-2.0 * log_std[i]).exp();
                let diff = s.latent[i] - mean[i];
                d_out[i] = s.advantage * diff * inv_var / n;
                let raw = acts.out[ACTION_DIM + i];
                d_out[ACTION_DIM + i] = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                    (s.advantage * (diff * diff * inv_var - 1.0) + self.config.entropy_coef) / n
                } else {
                    0.0
                };
            }
            self.net.backward(s.observation, &acts, &d_out, &mut grad);
        }
        Ok(grad)
    }

    /// One gradient-ascent step on a batch of complete episodes.
    pub fn reinforce_update(&mut self, batch: &[Trajectory]) -> Result<Diagnostics> {
        let objective = self.objective(batch)?;
        let grad = self.gradient(batch)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let steps: usize = batch.iter().map(|t| t.len()).sum();
        let mean_entropy = batch
            .iter()
            .flat_map(|t| &t.steps)
            .map(|s| self.distribution(&s.observation).1.iter().map(|&l| gaussian_entropy(l)).sum::<f64>())
            .sum::<f64>()
            / steps as f64;
        let mean_return = batch.iter().map(|t| t.total_reward()).sum::<f64>() / batch.len() as f64;
        self.adam.step(self.net.params_mut(), &grad, self.config.learning_rate);
        Ok(Diagnostics { grad_norm, mean_entropy, mean_return, objective })
    }
}

fn split_head(out: &[f64]) -> ([f64; 4], [f64; 4]) {
    let mut mean = [0.0; 4];
    let mut log_std = [0.0; 4];
    for i in 0..ACTION_DIM {
        mean[i] = out[i];
        log_std[i] = out[ACTION_DIM + i].clamp(LOG_STD_MIN, LOG_STD_MAX);
    }
    (mean, log_std)
}

/// Differential entropy of a 1-D Gaussian.
fn gaussian_entropy(log_std: f64) -> f64 {
    log_std + 0.5 * (2.0 * PI * core::f64::consts::E).ln()
}

impl Policy for ReinforcePolicy {
    fn act(&mut self, observation: &[f64], explore: bool, rng: &mut SimRng) -> Decision {
        let (mean, log_std) = self.distribution(observation);
        let mut latent = mean;
        if explore {
            for i in 0..ACTION_DIM {
                latent[i] += log_std[i].exp() * standard_normal(rng);
            }
        }
        let action = Action::from_array(latent.map(|u| u.tanh()));
        Decision { action, latent }
    }

    fn update(&mut self, batch: &[Trajectory]) -> Result<Option<Diagnostics>> {
        self.reinforce_update(batch).map(Some)
    }
}
