//! Batch command-line front end: `train`, `evaluate`, `sweep`, and `play`.
//!
//! Every invocation works inside its own run directory under the output root
//! (`--out`, else `$DOGFIGHT_OUT`, else `./runs`). Existing run directories
//! are never overwritten; name collisions get a numeric suffix.
//!
//! Exit codes: 0 success, 2 configuration error, 3 shape mismatch,
//! 4 training divergence, 1 anything else.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use dogfight::checkpoint::{self, Checkpoint};
use dogfight::config::RunConfig;
use dogfight::env::{self, Environment, EnvConfig};
use dogfight::eval::{self, SweepCell, SweepResult};
use dogfight::learner::{self, TrainInit, TrainLog};
use dogfight::net::QNet;
use dogfight::plot::{TrajectoryPlot, AGENT_COLOR, ENEMY_COLOR, PERCEIVED_COLOR};
use dogfight::policy::{GreedyPolicy, Policy, RandomPolicy};
use dogfight::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dogfight",
    about = "Noisy 1-v-1 air-combat simulator and dueling double-DQN trainer",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train an agent and write checkpoints plus a score log.
    Train(TrainArgs),
    /// Run a Monte Carlo tournament between two checkpoints.
    Evaluate(EvalArgs),
    /// Train the noise-variance x stack-depth grid and report the matrix.
    Sweep(SweepArgs),
    /// Roll out greedy episodes and emit traces and trajectory images.
    Play(PlayArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file applied over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Individual override, `key=value`; repeatable, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Master seed (run.seed; fans out to env and trainer seeds).
    #[arg(long)]
    seed: Option<u64>,
    /// Observation stack depth (env.stack_n).
    #[arg(long)]
    stack_n: Option<usize>,
    /// Position-noise variance (env.noise.var_xy).
    #[arg(long)]
    noise_var_xy: Option<f64>,
    /// Heading-noise variance (env.noise.var_psi).
    #[arg(long)]
    noise_var_psi: Option<f64>,
    /// Output root; falls back to $DOGFIGHT_OUT, then ./runs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run directory name under the output root (default: the subcommand).
    #[arg(long)]
    name: Option<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p)?;
            cfg.apply_text(&text)?;
        }
        for s in &self.sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{s}' is not key=value")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(s) = self.seed {
            cfg.set("run.seed", &s.to_string())?;
        }
        if let Some(n) = self.stack_n {
            cfg.env.stack_n = n;
        }
        if let Some(v) = self.noise_var_xy {
            cfg.env.noise.var_xy = v;
        }
        if let Some(v) = self.noise_var_psi {
            cfg.env.noise.var_psi = v;
        }
        Ok(cfg)
    }

    fn run_dir(&self, default_name: &str) -> Result<PathBuf> {
        let root = self
            .out
            .clone()
            .or_else(|| std::env::var_os("DOGFIGHT_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"));
        fs::create_dir_all(&root)?;
        let name = self.name.as_deref().unwrap_or(default_name);
        let first = root.join(name);
        // create_dir fails on collision, so an existing run is never reused.
        if fs::create_dir(&first).is_ok() {
            return Ok(first);
        }
        for k in 2u64.. {
            let p = root.join(format!("{name}-{k}"));
            if fs::create_dir(&p).is_ok() {
                return Ok(p);
            }
        }
        unreachable!("suffix space exhausted")
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn config_sha256(echo: &str) -> String {
    let mut h = Sha256::new();
    h.update(echo.as_bytes());
    format!("{:x}", h.finalize())
}

/// Write the manifest atomically: temp file in the run directory, then a
/// rename over the final name.
fn write_manifest(
    dir: &Path,
    echo: &str,
    started: u64,
    ended: Option<u64>,
    artifacts: &[String],
) -> Result<()> {
    let mut s = String::new();
    let status = if ended.is_some() { "complete" } else { "running" };
    s.push_str(&format!("status = {status}\n"));
    s.push_str(&format!("config_sha256 = {}\n", config_sha256(echo)));
    s.push_str(&format!("started_unix = {started}\n"));
    if let Some(e) = ended {
        s.push_str(&format!("ended_unix = {e}\n"));
    }
    for a in artifacts {
        s.push_str(&format!("artifact = {a}\n"));
    }
    let tmp = dir.join("manifest.txt.tmp");
    fs::write(&tmp, s)?;
    fs::rename(&tmp, dir.join("manifest.txt"))?;
    Ok(())
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Environment steps to train for (train.total_timesteps).
    #[arg(long)]
    steps: Option<u64>,
    /// Enable frozen-copy self-play (selfplay.enabled).
    #[arg(long)]
    selfplay: bool,
    /// Enemy random-action mixing rate (selfplay.lambda).
    #[arg(long)]
    lambda: Option<f64>,
    /// Resume training from a checkpoint file (warm start: parameters and
    /// exploration schedule; replay memory starts fresh).
    #[arg(long)]
    resume: Option<PathBuf>,
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut cfg = a.common.build()?;
    if let Some(s) = a.steps {
        cfg.train.total_timesteps = s;
    }
    if a.selfplay {
        cfg.selfplay_enabled = true;
    }
    if let Some(l) = a.lambda {
        cfg.selfplay.lambda = l;
    }
    if cfg.train.total_timesteps == 0 {
        return Err(Error::Config(
            "train.total_timesteps must be >= 1; pass --steps or set the key".into(),
        ));
    }
    cfg.validate()?;

    let init = match &a.resume {
        Some(p) => {
            let ckpt = checkpoint::load(p)?;
            Some(TrainInit { net: ckpt.net, start_step: ckpt.step })
        }
        None => None,
    };
    let start_step = init.as_ref().map_or(0, |i| i.start_step);
    let end_step = start_step + cfg.train.total_timesteps;

    let dir = a.common.run_dir("train")?;
    let echo = cfg.to_flat_text();
    fs::write(dir.join("config.txt"), &echo)?;
    let started = unix_now();
    write_manifest(&dir, &echo, started, None, &[])?;

    let mut periodic: Vec<String> = Vec::new();
    let ckpt_dir = dir.clone();
    let echo_for_sink = echo.clone();
    let mut sink = |step: u64, net: &QNet, _log: &TrainLog| -> Result<()> {
        let name = format!("checkpoint_{step:09}.ckpt");
        let ckpt = Checkpoint {
            net: net.clone(),
            step,
            config_echo: echo_for_sink.clone(),
        };
        checkpoint::save(ckpt_dir.join(&name), &ckpt)?;
        periodic.push(name);
        Ok(())
    };
    let selfplay = cfg.selfplay_enabled.then_some(cfg.selfplay);
    let out = learner::train(&cfg.env, &cfg.train, selfplay, Some(&mut sink), init)?;

    let scores = out.log.scores();
    let smoothed = eval::moving_average(&scores, cfg.log_window);
    let mut w = BufWriter::new(File::create(dir.join("score_log.csv"))?);
    writeln!(w, "episode,end_step,steps,score,smoothed")?;
    for (rec, sm) in out.log.episodes.iter().zip(&smoothed) {
        writeln!(w, "{},{},{},{},{}", rec.index, rec.end_step, rec.steps, rec.score, sm)?;
    }
    w.flush()?;

    let mut artifacts = vec!["config.txt".to_string(), "score_log.csv".to_string()];
    if !out.log.swaps.is_empty() {
        let mut w = BufWriter::new(File::create(dir.join("swaps.csv"))?);
        writeln!(w, "step,swap_index")?;
        for (step, idx) in &out.log.swaps {
            writeln!(w, "{step},{idx}")?;
        }
        w.flush()?;
        artifacts.push("swaps.csv".into());
    }
    let final_ckpt = Checkpoint { net: out.net, step: end_step, config_echo: echo.clone() };
    checkpoint::save(dir.join("final.ckpt"), &final_ckpt)?;
    artifacts.extend(periodic);
    artifacts.push("final.ckpt".into());
    write_manifest(&dir, &echo, started, Some(unix_now()), &artifacts)?;

    println!("run_dir: {}", dir.display());
    println!("episodes: {}", scores.len());
    let best = smoothed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if best.is_finite() {
        println!("best_smoothed_score: {best:.4}");
    }
    Ok(())
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// First-side checkpoint.
    #[arg(long)]
    checkpoint_a: PathBuf,
    /// Second-side checkpoint.
    #[arg(long)]
    checkpoint_b: PathBuf,
    /// Number of tournament episodes (eval.episodes).
    #[arg(long)]
    episodes: Option<u64>,
    /// Play every seed from the opposite side instead (mirror check).
    #[arg(long)]
    swap_roles: bool,
}

fn cmd_evaluate(a: &EvalArgs) -> Result<()> {
    let mut cfg = a.common.build()?;
    if let Some(e) = a.episodes {
        cfg.eval.episodes = e;
    }
    // Tournament episodes end at the first advantage geometry.
    cfg.env.terminate_on_advantage = true;
    cfg.env.validate()?;
    if cfg.eval.episodes == 0 {
        return Err(Error::Config("eval.episodes must be >= 1".into()));
    }

    let ca = checkpoint::load(&a.checkpoint_a)?;
    let cb = checkpoint::load(&a.checkpoint_b)?;
    let want = cfg.env.obs_len();
    for (name, net) in [("checkpoint-a", &ca.net), ("checkpoint-b", &cb.net)] {
        if net.input_dim() != want {
            return Err(Error::Shape {
                expected: want,
                got: net.input_dim(),
                context: format!("{name} input width vs configured stack_n"),
            });
        }
    }

    let dir = a.common.run_dir("evaluate")?;
    let echo = cfg.to_flat_text();
    fs::write(dir.join("config.txt"), &echo)?;
    let started = unix_now();
    write_manifest(&dir, &echo, started, None, &[])?;

    let (summary, records) = eval::run_tournament(
        &GreedyPolicy { net: &ca.net },
        &GreedyPolicy { net: &cb.net },
        &cfg.env,
        cfg.eval.episodes,
        cfg.eval.base_seed,
        a.swap_roles,
    )?;
    let mut w = BufWriter::new(File::create(dir.join("matches.csv"))?);
    eval::write_match_records_csv(&mut w, &records)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("summary.csv"))?);
    eval::write_summary_report(&mut w, &summary)?;
    w.flush()?;
    let artifacts =
        vec!["config.txt".to_string(), "matches.csv".to_string(), "summary.csv".to_string()];
    write_manifest(&dir, &echo, started, Some(unix_now()), &artifacts)?;

    println!("run_dir: {}", dir.display());
    println!("wins: {} losses: {} ties: {}", summary.wins, summary.losses, summary.ties);
    match summary.win_probability() {
        Some(p) => println!("win_probability: {p:.2}"),
        None => println!("win_probability: undefined"),
    }
    Ok(())
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Comma-separated position-noise variances (matrix rows).
    #[arg(long, default_value = "1,5,10,20,40")]
    variances: String,
    /// Comma-separated stack depths (matrix columns).
    #[arg(long, default_value = "1,2,4,8")]
    stacks: String,
    /// Comma-separated training seeds averaged per cell.
    #[arg(long, default_value = "0,1,2")]
    seeds: String,
    /// Continue an interrupted sweep in this run directory, reusing its
    /// completed cells.
    #[arg(long)]
    resume_dir: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Config(format!("invalid {what} entry '{x}'")))
        })
        .collect()
}

fn read_cells(path: &Path) -> Result<Vec<SweepCell>> {
    fn field<T: std::str::FromStr>(s: &str, line: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::Config(format!("malformed sweep cell line '{line}'")))
    }
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::Config(format!("malformed sweep cell line '{line}'")));
        }
        let score = if f[3] == "diverged" { None } else { Some(field(f[3], line)?) };
        out.push(SweepCell {
            var_xy: field(f[0], line)?,
            stack_n: field(f[1], line)?,
            seed: field(f[2], line)?,
            score,
        });
    }
    Ok(out)
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let cfg = a.common.build()?;
    if cfg.train.total_timesteps == 0 {
        return Err(Error::Config(
            "train.total_timesteps must be >= 1 for sweep cells".into(),
        ));
    }
    cfg.validate()?;
    let variances: Vec<f64> = parse_list(&a.variances, "variance")?;
    let stacks: Vec<usize> = parse_list(&a.stacks, "stack")?;
    let seeds: Vec<u64> = parse_list(&a.seeds, "seed")?;

    let dir = match &a.resume_dir {
        Some(d) => {
            if !d.is_dir() {
                return Err(Error::Config(format!("resume dir '{}' not found", d.display())));
            }
            d.clone()
        }
        None => a.common.run_dir("sweep")?,
    };
    let echo = cfg.to_flat_text();
    fs::write(dir.join("config.txt"), &echo)?;
    let started = unix_now();
    write_manifest(&dir, &echo, started, None, &[])?;

    let cells_path = dir.join("cells.csv");
    let mut done: Vec<SweepCell> =
        if cells_path.exists() { read_cells(&cells_path)? } else { Vec::new() };
    let mut w = if done.is_empty() {
        let mut w = BufWriter::new(File::create(&cells_path)?);
        writeln!(w, "var_xy,stack_n,seed,score")?;
        w
    } else {
        BufWriter::new(File::options().append(true).open(&cells_path)?)
    };

    let mut cells = Vec::new();
    for &var in &variances {
        for &n in &stacks {
            for &seed in &seeds {
                if let Some(k) =
                    done.iter().position(|c| c.var_xy == var && c.stack_n == n && c.seed == seed)
                {
                    cells.push(done.swap_remove(k));
                    continue;
                }
                let cell = eval::run_sweep_cell(var, n, seed, &cfg.env, &cfg.train, cfg.eval.episodes)?;
                // One flushed line per cell so an interrupted sweep resumes.
                match cell.score {
                    Some(s) => writeln!(w, "{var},{n},{seed},{s}")?,
                    None => writeln!(w, "{var},{n},{seed},diverged")?,
                }
                w.flush()?;
                let shown =
                    cell.score.map_or_else(|| "diverged".into(), |s| format!("{s:.2}"));
                println!("cell var={var} stack={n} seed={seed} -> {shown}");
                cells.push(cell);
            }
        }
    }
    drop(w);

    let sweep = SweepResult {
        cells,
        noise_variances: variances,
        stack_ns: stacks,
        eval_episodes: cfg.eval.episodes,
    };
    let mut w = BufWriter::new(File::create(dir.join("report.csv"))?);
    eval::write_sweep_report(&mut w, &sweep)?;
    w.flush()?;
    let artifacts =
        vec!["config.txt".to_string(), "cells.csv".to_string(), "report.csv".to_string()];
    write_manifest(&dir, &echo, started, Some(unix_now()), &artifacts)?;
    println!("run_dir: {}", dir.display());
    Ok(())
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Agent-side checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Enemy-side checkpoint; uniform random enemy when absent.
    #[arg(long)]
    enemy_checkpoint: Option<PathBuf>,
    /// Number of greedy rollout episodes to trace.
    #[arg(long, default_value_t = 3)]
    episodes: u64,
}

fn cmd_play(a: &PlayArgs) -> Result<()> {
    let cfg = a.common.build()?;
    cfg.env.validate()?;
    let ckpt = checkpoint::load(&a.checkpoint)?;
    let enemy = a.enemy_checkpoint.as_ref().map(checkpoint::load).transpose()?;
    let want = cfg.env.obs_len();
    let mut nets = vec![("checkpoint", &ckpt.net)];
    if let Some(e) = &enemy {
        nets.push(("enemy-checkpoint", &e.net));
    }
    for (name, net) in nets {
        if net.input_dim() != want {
            return Err(Error::Shape {
                expected: want,
                got: net.input_dim(),
                context: format!("{name} input width vs configured stack_n"),
            });
        }
    }

    let dir = a.common.run_dir("play")?;
    let echo = cfg.to_flat_text();
    fs::write(dir.join("config.txt"), &echo)?;
    let started = unix_now();
    write_manifest(&dir, &echo, started, None, &[])?;

    let mut artifacts = vec!["config.txt".to_string()];
    for i in 0..a.episodes {
        let seed = eval::derive_seed(cfg.env.rng_seed, i);
        let trace = format!("trace_{i:03}.csv");
        let png = format!("episode_{i:03}.png");
        play_episode(
            &cfg.env,
            &ckpt.net,
            enemy.as_ref().map(|c| &c.net),
            seed,
            &dir.join(&trace),
            &dir.join(&png),
        )?;
        artifacts.push(trace);
        artifacts.push(png);
    }
    write_manifest(&dir, &echo, started, Some(unix_now()), &artifacts)?;
    println!("run_dir: {}", dir.display());
    Ok(())
}

fn play_episode(
    env_cfg: &EnvConfig,
    agent: &QNet,
    enemy: Option<&QNet>,
    seed: u64,
    trace_path: &Path,
    png_path: &Path,
) -> Result<()> {
    let mut env = Environment::new(EnvConfig { rng_seed: seed, ..*env_cfg })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6A09_E667_F3BC_C908);
    let (mut obs_a, mut obs_e) = env.reset()?;

    let mut w = BufWriter::new(File::create(trace_path)?);
    env::write_trace_header(&mut w, env_cfg.stack_n)?;
    let mut agent_track = vec![(env.agent_state().x, env.agent_state().y)];
    let mut enemy_track = vec![(env.enemy_state().x, env.enemy_state().y)];
    let mut perceived = vec![(env.perceived_by_agent().x, env.perceived_by_agent().y)];
    loop {
        let act_a = agent.greedy_action(&obs_a)?;
        let act_e = match enemy {
            Some(n) => n.greedy_action(&obs_e)?,
            None => RandomPolicy.select(&obs_e, &mut rng)?,
        };
        let r = env.step(act_a, act_e)?;
        env::write_trace_row(&mut w, &env, &r, act_a, act_e)?;
        agent_track.push((env.agent_state().x, env.agent_state().y));
        enemy_track.push((env.enemy_state().x, env.enemy_state().y));
        perceived.push((env.perceived_by_agent().x, env.perceived_by_agent().y));
        if r.done {
            break;
        }
        obs_a = r.obs_agent;
        obs_e = r.obs_enemy;
    }
    w.flush()?;

    let mut plot = TrajectoryPlot::new(env_cfg.arena, 800);
    plot.track(&agent_track, AGENT_COLOR);
    plot.track(&enemy_track, ENEMY_COLOR);
    plot.scatter(&perceived, PERCEIVED_COLOR);
    plot.save(png_path)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.cmd {
        Cmd::Train(a) => cmd_train(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Play(a) => cmd_play(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Shape { .. } => 3,
                Error::Divergence { .. } => 4,
                _ => 1,
            })
        }
    }
}
