//! Subcommand implementations. Each returns the process exit code on
//! success; errors are usage or configuration problems (exit 2).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context};
use qcd_core::agents::{
    evaluate, train, Decision, Diagnostics, Policy, RandomPolicy, ReinforceConfig, ReinforcePolicy, ScriptedPolicy,
    Trajectory,
};
use qcd_core::challenge::{parse_challenge_spec, Challenge, ChallengeSpec, TargetName};
use qcd_core::env::{CircuitDesigner, EnvConfig, Environment, StepResult};
use qcd_core::oracles::{self, OracleReport};
use qcd_core::{rng_from_seed, SimRng};
use serde::{Deserialize, Serialize};

use crate::config::{AgentKind, RunConfig, DEFAULT_SEEDS};
use crate::formats::{self, EpisodeRow, MetricsRow, RowWriter, RunSummary, SeedFinal};

/// Environment for one seed. Custom targets are read from the spec's path.
pub fn build_env(cfg: &RunConfig, seed: u64) -> anyhow::Result<CircuitDesigner> {
    let challenge = challenge_for(&cfg.challenge, seed)?;
    let mut env_cfg = EnvConfig::new(challenge, seed);
    env_cfg.cost = cfg.cost;
    env_cfg.resample_target = cfg.resample_target;
    Ok(CircuitDesigner::new(env_cfg)?)
}

pub fn challenge_for(spec: &ChallengeSpec, seed: u64) -> anyhow::Result<Challenge> {
    if spec.target != TargetName::Custom {
        return Ok(Challenge::from_spec(spec, seed)?);
    }
    let Some(path) = &spec.custom_path else {
        bail!("custom challenge needs a `path=` parameter");
    };
    let target = formats::read_target(Path::new(path), spec.family)?;
    Ok(Challenge::with_target(spec, target)?)
}

/// Stored REINFORCE network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyFile {
    pub observation_len: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

fn load_policy_file(path: &Path, seed: u64) -> anyhow::Result<PolicyFile> {
    let path = if path.is_dir() { path.join(format!("policy_seed{seed}.json")) } else { path.to_path_buf() };
    let text = fs::read_to_string(&path).with_context(|| format!("reading policy {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing policy {}", path.display()))
}

/// The agents selectable from the command line.
pub enum AnyPolicy {
    Random(RandomPolicy),
    Reinforce(ReinforcePolicy),
    Scripted(ScriptedPolicy),
}

impl AnyPolicy {
    fn inner(&mut self) -> &mut dyn Policy {
        match self {
            Self::Random(p) => p,
            Self::Reinforce(p) => p,
            Self::Scripted(p) => p,
        }
    }
}

impl Policy for AnyPolicy {
    fn act(&mut self, observation: &[f64], explore: bool, rng: &mut SimRng) -> Decision {
        self.inner().act(observation, explore, rng)
    }

    fn begin_episode(&mut self) {
        self.inner().begin_episode()
    }

    fn update(&mut self, batch: &[Trajectory]) -> qcd_core::Result<Option<Diagnostics>> {
        self.inner().update(batch)
    }
}

pub fn make_policy(
    cfg: &RunConfig,
    env: &CircuitDesigner,
    seed: u64,
    policy_path: Option<&Path>,
) -> anyhow::Result<AnyPolicy> {
    Ok(match &cfg.agent {
        AgentKind::Random => AnyPolicy::Random(RandomPolicy),
        AgentKind::Scripted(name) => AnyPolicy::Scripted(ScriptedPolicy::new(name, env.config().num_qubits())?),
        AgentKind::Reinforce => {
            let rcfg = ReinforceConfig { seed, ..cfg.reinforce };
            AnyPolicy::Reinforce(match policy_path {
                None => ReinforcePolicy::new(env.observation_len(), rcfg)?,
                Some(p) => {
                    let file = load_policy_file(p, seed)?;
                    if file.observation_len != env.observation_len() {
                        bail!(
                            "policy expects observations of length {}, environment gives {}",
                            file.observation_len,
                            env.observation_len()
                        );
                    }
                    let rcfg = ReinforceConfig { hidden: file.hidden, ..rcfg };
                    ReinforcePolicy::from_params(file.observation_len, rcfg, file.params)?
                }
            })
        }
    })
}

/// Reset seed of episode `episode` in a run seeded with `seed`.
pub fn episode_seed(seed: u64, episode: u64) -> u64 {
    seed.wrapping_add(episode)
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub struct RunOptions {
    pub episodes: u64,
    pub replay: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    pub greedy: bool,
}

/// Episode log, observation log and final circuit for one seed.
struct RunLogs {
    episodes: RowWriter<fs::File>,
    observations: RowWriter<fs::File>,
}

impl RunLogs {
    fn create(out: &Path, seed: u64, obs_len: usize) -> anyhow::Result<Self> {
        let mut observations = RowWriter::create(&out.join(format!("observations_seed{seed}.csv")))?;
        let header = ["episode".to_string(), "step".to_string()].into_iter().chain((0..obs_len).map(|i| format!("x{i}")));
        observations.write_record(header)?;
        Ok(Self { episodes: RowWriter::create(&out.join(format!("episodes_seed{seed}.csv")))?, observations })
    }

    fn record(&mut self, episode: u64, raw: [f64; 4], r: &StepResult) -> anyhow::Result<()> {
        let [o, q, c, phi] = raw;
        self.episodes.write(&EpisodeRow {
            episode,
            step: r.info.step,
            o,
            q,
            c,
            phi,
            reward: r.reward,
            terminated: r.terminated,
            truncated: r.truncated,
            depth: r.info.depth,
            qubits_used: r.info.qubits_used,
        })?;
        let fields = [episode.to_string(), r.info.step.to_string()]
            .into_iter()
            .chain(r.observation.iter().map(|x| x.to_string()));
        self.observations.write_record(fields)?;
        Ok(())
    }
}

/// Run episodes per seed (or replay an action log) and write the logs.
pub fn cmd_run(cfg: &RunConfig, opts: &RunOptions, out: &mut dyn Write) -> anyhow::Result<u8> {
    ensure_dir(&cfg.out)?;
    let seeds = cfg.seeds_or(&[0]);
    for &seed in &seeds {
        let mut env = build_env(cfg, seed)?;
        let mut logs = RunLogs::create(&cfg.out, seed, env.observation_len())?;
        if let Some(path) = &opts.replay {
            replay_log(&mut env, seed, path, &mut logs, out)?;
        } else {
            let mut policy = make_policy(cfg, &env, seed, opts.policy.as_deref())?;
            let mut rng = rng_from_seed(seed);
            for episode in 0..opts.episodes {
                let mut obs = env.reset(episode_seed(seed, episode))?;
                policy.begin_episode();
                let mut total = 0.0;
                loop {
                    let d = policy.act(&obs, !opts.greedy, &mut rng);
                    let r = env.step(&d.action)?;
                    logs.record(episode, d.action.components(), &r)?;
                    total += r.reward;
                    if r.done() {
                        writeln!(
                            out,
                            "seed {seed} episode {episode}: return {total:.6} length {} depth {} qubits {}",
                            r.info.step, r.info.depth, r.info.qubits_used
                        )?;
                        break;
                    }
                    obs = r.observation;
                }
            }
        }
        let circuit = env.circuit();
        write_file(&cfg.out.join(format!("circuit_seed{seed}.txt")), &circuit.render_text())?;
        write_file(&cfg.out.join(format!("circuit_seed{seed}.export")), &formats::circuit_to_text(circuit))?;
    }
    Ok(0)
}

/// Feed the raw actions of an episode log back through a fresh environment.
fn replay_log(
    env: &mut CircuitDesigner,
    seed: u64,
    path: &Path,
    logs: &mut RunLogs,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    let rows: Vec<EpisodeRow> = formats::read_rows(path)?;
    let mut current = None;
    let mut total = 0.0;
    for row in rows {
        if current != Some(row.episode) {
            if env.step_index() > 0 && !env.is_done() {
                bail!("episode {} in {} ends before the environment does", current.unwrap_or(0), path.display());
            }
            env.reset(episode_seed(seed, row.episode))?;
            current = Some(row.episode);
            total = 0.0;
        }
        if env.is_done() {
            bail!("episode {} in {} continues past its end", row.episode, path.display());
        }
        let action = qcd_core::env::Action::new(row.o, row.q, row.c, row.phi);
        let r = env.step(&action)?;
        logs.record(row.episode, action.components(), &r)?;
        total += r.reward;
        if r.done() {
            writeln!(out, "seed {seed} episode {}: return {total:.6} length {}", row.episode, r.info.step)?;
        }
    }
    Ok(())
}

/// Worker count: `QCD_THREADS` if set, else the machine's parallelism.
pub fn thread_cap() -> usize {
    std::env::var("QCD_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Map `job` over `seeds` on up to [`thread_cap`] threads, keeping seed order.
pub fn per_seed<T, F>(seeds: &[u64], job: F) -> anyhow::Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> anyhow::Result<T> + Sync,
{
    let workers = thread_cap().min(seeds.len()).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<anyhow::Result<T>>>> = Mutex::new(seeds.iter().map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let r = job(seeds[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every seed ran"))
        .collect()
}

/// Train one seed, streaming its metrics CSV.
pub fn train_seed(cfg: &RunConfig, seed: u64) -> anyhow::Result<SeedFinal> {
    let mut env = build_env(cfg, seed)?;
    let mut policy = make_policy(cfg, &env, seed, None)?;
    let mut writer = RowWriter::create(&cfg.out.join(format!("metrics_seed{seed}.csv")))?;
    let mut write_err = None;
    let mut episodes = 0;
    let batch = match cfg.agent {
        AgentKind::Reinforce => cfg.reinforce.batch_episodes,
        _ => 1,
    };
    let window = train(&mut policy, &mut env, cfg.total_steps, batch, seed, |rep| {
        episodes += 1;
        if write_err.is_some() {
            return;
        }
        let row = MetricsRow {
            global_step: rep.global_step,
            episode: rep.episode,
            mean_return_100: rep.mean_return,
            mean_qubits_100: rep.mean_qubits,
            mean_depth_100: rep.mean_depth,
        };
        if let Err(e) = writer.write(&row) {
            write_err = Some(e);
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if let AnyPolicy::Reinforce(p) = &policy {
        let file = PolicyFile { observation_len: env.observation_len(), hidden: p.config().hidden, params: p.params().to_vec() };
        write_file(&cfg.out.join(format!("policy_seed{seed}.json")), &serde_json::to_string(&file)?)?;
    }
    Ok(SeedFinal {
        seed,
        episodes,
        mean_return: window.mean_return(),
        mean_qubits: window.mean_qubits(),
        mean_depth: window.mean_depth(),
    })
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> anyhow::Result<u8> {
    ensure_dir(&cfg.out)?;
    let seeds = cfg.seeds_or(&DEFAULT_SEEDS);
    let finals = per_seed(&seeds, |seed| train_seed(cfg, seed))?;
    let summary = RunSummary::new(cfg.challenge.to_string(), cfg.agent.to_string(), cfg.total_steps, finals);
    let json = summary.to_json();
    write_file(&cfg.out.join("summary.json"), &json)?;
    writeln!(out, "{json}")?;
    Ok(0)
}

pub struct EvalOptions {
    pub episodes: usize,
    pub policy: Option<PathBuf>,
    pub greedy: bool,
}

pub fn cmd_eval(cfg: &RunConfig, opts: &EvalOptions, out: &mut dyn Write) -> anyhow::Result<u8> {
    if cfg.agent == AgentKind::Reinforce && opts.policy.is_none() {
        bail!("evaluating reinforce needs --policy (a policy file or a training output directory)");
    }
    ensure_dir(&cfg.out)?;
    let seeds = cfg.seeds_or(&DEFAULT_SEEDS);
    let finals = per_seed(&seeds, |seed| {
        let mut env = build_env(cfg, seed)?;
        let mut policy = make_policy(cfg, &env, seed, opts.policy.as_deref())?;
        let s = evaluate(&mut policy, &mut env, opts.episodes, seed, !opts.greedy)?;
        Ok(SeedFinal {
            seed,
            episodes: s.episodes,
            mean_return: s.mean_return,
            mean_qubits: s.mean_qubits,
            mean_depth: s.mean_depth,
        })
    })?;
    let summary = RunSummary::new(cfg.challenge.to_string(), cfg.agent.to_string(), 0, finals);
    let json = summary.to_json();
    write_file(&cfg.out.join("eval_summary.json"), &json)?;
    writeln!(out, "{json}")?;
    Ok(0)
}

/// Oracle checks selected by name; `all` runs every one.
pub fn oracle_reports(name: &str) -> anyhow::Result<Vec<OracleReport>> {
    let certificate = |spec: &str| -> anyhow::Result<Vec<OracleReport>> { Ok(oracles::certificate(spec)?) };
    Ok(match name {
        "apply" => vec![oracles::apply_vs_embed(200, 1)?],
        "haar" => {
            let mut v = Vec::new();
            for n in 1..=3 {
                v.push(oracles::haar_unitary_overlap(n, 2000, 10 + n as u64)?);
                v.push(oracles::haar_state_overlap(n, 2000, 20 + n as u64)?);
            }
            v
        }
        "born" => vec![oracles::born_frequency(2000, 3)?],
        "gradient" => vec![oracles::reinforce_gradient_check(12, 400, 4)?],
        "all" => {
            let mut v = Vec::new();
            for part in ["apply", "haar", "born", "gradient", "UC-hadamard", "SP-bell", "SP-ghz", "UC-toffoli"] {
                v.extend(oracle_reports(part)?);
            }
            v
        }
        spec => {
            parse_challenge_spec(spec).map_err(|e| anyhow::anyhow!("unknown oracle `{spec}`: {e}"))?;
            certificate(spec)?
        }
    })
}

pub fn format_report(r: &OracleReport) -> String {
    format!(
        "{} {}: measured {:.12e}, expected {:.12e}, tolerance {:.1e}",
        if r.passed { "PASS" } else { "FAIL" },
        r.name,
        r.measured,
        r.expected,
        r.tolerance
    )
}

pub fn cmd_oracle(name: &str, out: &mut dyn Write) -> anyhow::Result<u8> {
    let reports = oracle_reports(name)?;
    for r in &reports {
        writeln!(out, "{}", format_report(r))?;
    }
    Ok(oracle_exit_code(&reports))
}

/// 0 when every check passed, 1 otherwise.
pub fn oracle_exit_code(reports: &[OracleReport]) -> u8 {
    if reports.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}

/// Render a circuit export, or the final circuit of one episode.
pub fn cmd_render(
    cfg: &RunConfig,
    circuit: Option<&Path>,
    policy: Option<&Path>,
    out: &mut dyn Write,
) -> anyhow::Result<u8> {
    let text = match circuit {
        Some(path) => formats::parse_circuit(&formats::read_to_string(path)?)?.render_text(),
        None => {
            let seed = cfg.seeds_or(&[0])[0];
            let mut env = build_env(cfg, seed)?;
            let mut policy = make_policy(cfg, &env, seed, policy)?;
            let mut rng = rng_from_seed(seed);
            let mut obs = env.reset(episode_seed(seed, 0))?;
            policy.begin_episode();
            loop {
                let r = env.step(&policy.act(&obs, false, &mut rng).action)?;
                if r.done() {
                    break;
                }
                obs = r.observation;
            }
            env.circuit().render_text()
        }
    };
    write!(out, "{text}")?;
    Ok(0)
}
