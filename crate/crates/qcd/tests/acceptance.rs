//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::path::Path;
use std::time::{Duration, Instant};

use qcd::commands::{self, EvalOptions, RunOptions};
use qcd::config::{AgentKind, Overrides, RunConfig};
use qcd_core::agents::{evaluate, run_episode, RandomPolicy, ScriptedPolicy};
use qcd_core::challenge::{parse_challenge_spec, sp_reward, uc_reward, Target};
use qcd_core::env::{step_cost, CircuitDesigner, EnvConfig};
use qcd_core::oracles;
use qcd_core::quantum::frobenius_distance;
use qcd_core::rng_from_seed;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn designer(spec: &str) -> CircuitDesigner {
    CircuitDesigner::new(EnvConfig::from_spec(&parse_challenge_spec(spec).unwrap(), 0).unwrap()).unwrap()
}

/// Run the named script to its end; returns (episode return, qubits used, env).
fn scripted(spec: &str, script: &str) -> (f64, usize, CircuitDesigner) {
    let mut env = designer(spec);
    let n = env.config().num_qubits();
    let mut p = ScriptedPolicy::new(script, n).unwrap();
    let (_, m) = run_episode(&mut p, &mut env, &mut rng_from_seed(0), false).unwrap();
    (m.total_return, m.qubits_used, env)
}

fn hadamard_reconstruction() -> Outcome {
    let (_, _, env) = scripted("UC-hadamard", "hadamard");
    let Target::Unitary(h) = env.challenge().target() else { unreachable!() };
    let v = env.circuit().composed_unitary().unwrap();
    let d = frobenius_distance(&v, h).unwrap();
    let r = uc_reward(&v, h, true).unwrap();
    check(d <= 1e-10 && (r - 1.0).abs() <= 1e-10, format!("D = {d:.3e}, R* = {r:.15}"))
}

fn bell_and_ghz_certificates() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (spec, script, qubits) in [("SP-bell", "bell", 2), ("SP-ghz", "ghz", 3)] {
        let (_, used, env) = scripted(spec, script);
        let Target::State(t) = env.challenge().target() else { unreachable!() };
        let r = sp_reward(env.state(), t, true).unwrap();
        ok &= (r - 1.0).abs() <= 1e-9 && used == qubits;
        parts.push(format!("{spec}: R* = {r:.15}, qubits {used}"));
    }
    check(ok, parts.join("; "))
}

fn empty_circuit_optimum() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for spec in ["SP-bell", "SP-ghz"] {
        let (ret, used, _) = scripted(spec, "terminate");
        ok &= (ret - 0.5).abs() <= 1e-12 && used == 0;
        parts.push(format!("{spec}: return {ret:.15}"));
    }
    check(ok, parts.join("; "))
}

fn step_cost_profile() -> Outcome {
    let early = (1..=4).map(|t| step_cost(t, 12)).fold(0.0f64, f64::max);
    let c8 = step_cost(8, 12);
    let c12 = step_cost(12, 12);
    let ok = early.abs() <= 1e-12 && (c8 - 0.5).abs() <= 1e-12 && (c12 - 1.0).abs() <= 1e-12;
    check(ok, format!("max C_1..4 = {early}, C_8 = {c8}, C_12 = {c12}"))
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let mut reports = vec![oracles::apply_vs_embed(200, 1).unwrap()];
    for n in 1..=3 {
        reports.push(oracles::haar_unitary_overlap(n, 2000, 10 + n as u64).unwrap());
        reports.push(oracles::haar_state_overlap(n, 2000, 20 + n as u64).unwrap());
    }
    reports.push(oracles::born_frequency(2000, 3).unwrap());
    reports.push(oracles::reinforce_gradient_check(12, 400, 4).unwrap());
    let elapsed = start.elapsed();
    for r in &reports {
        println!("      {}", commands::format_report(r));
    }
    let ok = reports.iter().all(|r| r.passed) && elapsed < Duration::from_secs(60);
    check(ok, format!("{} checks in {elapsed:.2?}", reports.len()))
}

fn config(agent: &str, seeds: Vec<u64>, steps: usize, out: &Path) -> RunConfig {
    let o = Overrides {
        challenge: Some("SP-bell".into()),
        agent: Some(agent.into()),
        seeds: Some(seeds),
        steps: Some(steps),
        out: Some(out.to_path_buf()),
        ..Default::default()
    };
    RunConfig::load(&o, AgentKind::Reinforce).unwrap()
}

fn learning_over_random() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let seeds: Vec<u64> = (0..8).collect();
    let cfg = config("reinforce", seeds.clone(), 200_000, dir.path());
    let trained = commands::per_seed(&seeds, |seed| commands::train_seed(&cfg, seed)).unwrap();
    let mut wins = 0;
    for t in &trained {
        let mut env = commands::build_env(&cfg, t.seed).unwrap();
        let random = evaluate(&mut RandomPolicy, &mut env, 100, t.seed, true).unwrap();
        let won = t.mean_return > random.mean_return;
        wins += won as usize;
        println!(
            "      seed {}: reinforce {:.4} vs random {:.4} {}",
            t.seed,
            t.mean_return,
            random.mean_return,
            if won { "win" } else { "loss" }
        );
    }
    let elapsed = start.elapsed();
    check(wins >= 6 && elapsed < Duration::from_secs(30 * 60), format!("{wins}/8 seeds beat random in {elapsed:.1?}"))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let run = config("random", vec![3, 4], 1, d.path());
        let opts = RunOptions { episodes: 50, replay: None, policy: None, greedy: false };
        commands::cmd_run(&run, &opts, &mut std::io::sink()).unwrap();
        let train = config("reinforce", vec![0, 1], 4000, &d.path().join("train"));
        commands::cmd_train(&train, &mut std::io::sink()).unwrap();
        let eval = config("random", vec![5, 6], 1, &d.path().join("eval"));
        commands::cmd_eval(&eval, &EvalOptions { episodes: 30, policy: None, greedy: false }, &mut std::io::sink())
            .unwrap();
    }
    let files = [
        "episodes_seed3.csv",
        "episodes_seed4.csv",
        "observations_seed3.csv",
        "train/summary.json",
        "train/metrics_seed0.csv",
        "train/metrics_seed1.csv",
        "train/policy_seed1.json",
        "eval/eval_summary.json",
    ];
    let same: Vec<bool> = files
        .iter()
        .map(|f| std::fs::read(dirs[0].path().join(f)).unwrap() == std::fs::read(dirs[1].path().join(f)).unwrap())
        .collect();
    let identical = same.iter().filter(|&&s| s).count();
    check(identical == files.len(), format!("{identical}/{} output files bitwise identical", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 7] = [
        ("Hadamard reconstruction", hadamard_reconstruction, Some(Duration::from_secs(1))),
        ("Bell and GHZ certificates", bell_and_ghz_certificates, Some(Duration::from_secs(1))),
        ("Empty-circuit local optimum", empty_circuit_optimum, None),
        ("Step-cost profile", step_cost_profile, None),
        ("Oracle suite", oracle_suite, None),
        ("Learning over random", learning_over_random, None),
        ("Determinism", determinism, None),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed >= limit {
                outcome.passed = false;
                outcome.detail += &format!(" (took {elapsed:.2?}, limit {limit:?})");
            }
        }
        failures += !outcome.passed as usize;
        println!("{} {name}: {}", if outcome.passed { "PASS" } else { "FAIL" }, outcome.detail);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
