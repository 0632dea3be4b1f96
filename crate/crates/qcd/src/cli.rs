use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{self, EvalOptions, RunOptions};
use crate::config::{parse_seeds, AgentKind, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "qcd", version, about = "Quantum circuit designer: simulate, train and check circuit-building agents")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Challenge spec, e.g. SP-bell, UC-random:seed=3, UC-custom:path=u.txt
    #[arg(long, global = true)]
    pub challenge: Option<String>,
    /// random, reinforce or scripted:<name>
    #[arg(long, global = true)]
    pub agent: Option<String>,
    /// Comma list (0,1,2) or range (0..8)
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    /// Environment steps per seed when training
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run episodes and write the episode log and final circuit
    Run {
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        /// Replay the raw actions of an episode log instead of acting
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Trained policy file or training output directory
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Act on the policy mean instead of sampling
        #[arg(long)]
        greedy: bool,
    },
    /// Train one agent per seed, streaming metrics and writing a summary
    Train,
    /// Evaluate an agent per seed without learning
    Eval {
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        greedy: bool,
    },
    /// Run oracle checks: apply, haar, born, gradient, a challenge spec, or all
    Oracle {
        #[arg(default_value = "all")]
        name: String,
    },
    /// Draw a circuit export, or the circuit one episode of the agent builds
    Render {
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        policy: Option<PathBuf>,
    },
}

fn load(common: &Common, default_agent: AgentKind) -> anyhow::Result<RunConfig> {
    let overrides = Overrides {
        config: common.config.clone(),
        challenge: common.challenge.clone(),
        agent: common.agent.clone(),
        seeds: common.seeds.as_deref().map(parse_seeds).transpose()?,
        steps: common.steps,
        out: common.out.clone(),
    };
    RunConfig::load(&overrides, default_agent)
}

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> anyhow::Result<u8> {
    let common = &cli.common;
    match cli.command {
        Command::Run { episodes, replay, policy, greedy } => {
            let cfg = load(common, AgentKind::Random)?;
            commands::cmd_run(&cfg, &RunOptions { episodes, replay, policy, greedy }, out)
        }
        Command::Train => commands::cmd_train(&load(common, AgentKind::Reinforce)?, out),
        Command::Eval { episodes, policy, greedy } => {
            let cfg = load(common, AgentKind::Random)?;
            commands::cmd_eval(&cfg, &EvalOptions { episodes, policy, greedy }, out)
        }
        Command::Oracle { name } => commands::cmd_oracle(&name, out),
        Command::Render { circuit, policy } => {
            let cfg = load(common, AgentKind::Random)?;
            commands::cmd_render(&cfg, circuit.as_deref(), policy.as_deref(), out)
        }
    }
}

/// Parse arguments and run; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli, &mut std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
