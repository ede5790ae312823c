//! Run configuration: a flat `key = value` text format with dotted section
//! names, plus the echo used by manifests and checkpoints.
//!
//! Every hyperparameter has the project default and can be overridden either
//! in a config file or with repeated `key=value` pairs on the command line.
//! Unknown keys are rejected by name.

use crate::env::EnvConfig;
use crate::learner::TrainConfig;
use crate::selfplay::SelfPlayConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub episodes: u64,
    pub base_seed: u64,
}

impl Default for EvalParams {
    fn default() -> Self {
        Self { episodes: 1000, base_seed: 0 }
    }
}

/// Union of all run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub selfplay_enabled: bool,
    pub selfplay: SelfPlayConfig,
    pub eval: EvalParams,
    /// Moving-average window for smoothed score reporting.
    pub log_window: usize,
    /// Master seed; seeds the environment and the learner unless those are
    /// overridden individually.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvConfig::default(),
            train: TrainConfig::default(),
            selfplay_enabled: false,
            selfplay: SelfPlayConfig::default(),
            eval: EvalParams::default(),
            log_window: 100,
            seed: 0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{value}' for key '{key}'"))),
    }
}

impl RunConfig {
    /// Apply one dotted-key override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "run.seed" => {
                self.seed = parse_num(key, value)?;
                self.env.rng_seed = self.seed;
                self.train.seed = self.seed;
            }
            "log.window" => self.log_window = parse_num(key, value)?,

            "env.arena.x_min" => self.env.arena.x_min = parse_num(key, value)?,
            "env.arena.x_max" => self.env.arena.x_max = parse_num(key, value)?,
            "env.arena.y_min" => self.env.arena.y_min = parse_num(key, value)?,
            "env.arena.y_max" => self.env.arena.y_max = parse_num(key, value)?,
            "env.kinematics.delta_psi" => self.env.kinematics.delta_psi = parse_num(key, value)?,
            "env.kinematics.delta_v" => self.env.kinematics.delta_v = parse_num(key, value)?,
            "env.kinematics.v_min" => self.env.kinematics.v_min = parse_num(key, value)?,
            "env.kinematics.v_max" => self.env.kinematics.v_max = parse_num(key, value)?,
            "env.reward.crash_min" => self.env.reward.crash_min = parse_num(key, value)?,
            "env.reward.crash_max" => self.env.reward.crash_max = parse_num(key, value)?,
            "env.reward.engage_max" => self.env.reward.engage_max = parse_num(key, value)?,
            "env.reward.ata_gate" => self.env.reward.ata_gate = parse_num(key, value)?,
            "env.reward.aa_gate" => self.env.reward.aa_gate = parse_num(key, value)?,
            "env.noise.mu" => self.env.noise.mu = parse_num(key, value)?,
            "env.noise.var_xy" => self.env.noise.var_xy = parse_num(key, value)?,
            "env.noise.var_psi" => self.env.noise.var_psi = parse_num(key, value)?,
            "env.stack_n" => self.env.stack_n = parse_num(key, value)?,
            "env.episode_length" => self.env.episode_length = parse_num(key, value)?,
            "env.terminate_on_advantage" => {
                self.env.terminate_on_advantage = parse_bool(key, value)?
            }
            "env.rng_seed" => self.env.rng_seed = parse_num(key, value)?,

            "train.learning_rate" => self.train.learning_rate = parse_num(key, value)?,
            "train.gamma" => self.train.gamma = parse_num(key, value)?,
            "train.replay_capacity" => self.train.replay_capacity = parse_num(key, value)?,
            "train.batch_size" => self.train.batch_size = parse_num(key, value)?,
            "train.target_update_every" => {
                self.train.target_update_every = parse_num(key, value)?
            }
            "train.eps_initial" => self.train.eps_initial = parse_num(key, value)?,
            "train.eps_final" => self.train.eps_final = parse_num(key, value)?,
            "train.eps_anneal_steps" => self.train.eps_anneal_steps = parse_num(key, value)?,
            "train.total_timesteps" => self.train.total_timesteps = parse_num(key, value)?,
            "train.hidden_dim" => self.train.hidden_dim = parse_num(key, value)?,
            "train.huber_loss" => self.train.huber_loss = parse_bool(key, value)?,
            "train.checkpoint_every" => self.train.checkpoint_every = parse_num(key, value)?,
            "train.seed" => self.train.seed = parse_num(key, value)?,

            "selfplay.enabled" => self.selfplay_enabled = parse_bool(key, value)?,
            "selfplay.swap_every" => self.selfplay.swap_every = parse_num(key, value)?,
            "selfplay.lambda" => self.selfplay.lambda = parse_num(key, value)?,

            "eval.episodes" => self.eval.episodes = parse_num(key, value)?,
            "eval.base_seed" => self.eval.base_seed = parse_num(key, value)?,

            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parse the flat text format, applying each line onto `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Full flat-text echo of every setting; parsing it back reproduces the
    /// config exactly.
    pub fn to_flat_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("run.seed", self.seed.to_string());
        kv("log.window", self.log_window.to_string());
        kv("env.arena.x_min", self.env.arena.x_min.to_string());
        kv("env.arena.x_max", self.env.arena.x_max.to_string());
        kv("env.arena.y_min", self.env.arena.y_min.to_string());
        kv("env.arena.y_max", self.env.arena.y_max.to_string());
        kv("env.kinematics.delta_psi", self.env.kinematics.delta_psi.to_string());
        kv("env.kinematics.delta_v", self.env.kinematics.delta_v.to_string());
        kv("env.kinematics.v_min", self.env.kinematics.v_min.to_string());
        kv("env.kinematics.v_max", self.env.kinematics.v_max.to_string());
        kv("env.reward.crash_min", self.env.reward.crash_min.to_string());
        kv("env.reward.crash_max", self.env.reward.crash_max.to_string());
        kv("env.reward.engage_max", self.env.reward.engage_max.to_string());
        kv("env.reward.ata_gate", self.env.reward.ata_gate.to_string());
        kv("env.reward.aa_gate", self.env.reward.aa_gate.to_string());
        kv("env.noise.mu", self.env.noise.mu.to_string());
        kv("env.noise.var_xy", self.env.noise.var_xy.to_string());
        kv("env.noise.var_psi", self.env.noise.var_psi.to_string());
        kv("env.stack_n", self.env.stack_n.to_string());
        kv("env.episode_length", self.env.episode_length.to_string());
        kv("env.terminate_on_advantage", self.env.terminate_on_advantage.to_string());
        kv("env.rng_seed", self.env.rng_seed.to_string());
        kv("train.learning_rate", self.train.learning_rate.to_string());
        kv("train.gamma", self.train.gamma.to_string());
        kv("train.replay_capacity", self.train.replay_capacity.to_string());
        kv("train.batch_size", self.train.batch_size.to_string());
        kv("train.target_update_every", self.train.target_update_every.to_string());
        kv("train.eps_initial", self.train.eps_initial.to_string());
        kv("train.eps_final", self.train.eps_final.to_string());
        kv("train.eps_anneal_steps", self.train.eps_anneal_steps.to_string());
        kv("train.total_timesteps", self.train.total_timesteps.to_string());
        kv("train.hidden_dim", self.train.hidden_dim.to_string());
        kv("train.huber_loss", self.train.huber_loss.to_string());
        kv("train.checkpoint_every", self.train.checkpoint_every.to_string());
        kv("train.seed", self.train.seed.to_string());
        kv("selfplay.enabled", self.selfplay_enabled.to_string());
        kv("selfplay.swap_every", self.selfplay.swap_every.to_string());
        kv("selfplay.lambda", self.selfplay.lambda.to_string());
        kv("eval.episodes", self.eval.episodes.to_string());
        kv("eval.base_seed", self.eval.base_seed.to_string());
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.train.validate()?;
        if self.selfplay_enabled {
            self.selfplay.validate()?;
        }
        if self.log_window == 0 {
            return Err(Error::Config("log.window must be >= 1".into()));
        }
        Ok(())
    }
}
