//! Two-agent episode loop: random resets, simultaneous stepping, per-side
//! noisy stacked observations, rewards, and termination bookkeeping.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::observation::{self, NoiseModel, Observation, StackBuffer, OBS_DIM};
use crate::reward::{self, Outcome, RewardParams};
use crate::sim::{self, AircraftState, Arena, KinematicsParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub arena: Arena,
    pub kinematics: KinematicsParams,
    pub reward: RewardParams,
    pub noise: NoiseModel,
    pub stack_n: usize,
    pub episode_length: u32,
    /// When set, the first advantage classification ends the episode as a
    /// win/loss. Training leaves this off so advantage can accumulate score.
    pub terminate_on_advantage: bool,
    pub rng_seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            arena: Arena::default(),
            kinematics: KinematicsParams::default(),
            reward: RewardParams::default(),
            noise: NoiseModel::default(),
            stack_n: 1,
            episode_length: 200,
            terminate_on_advantage: false,
            rng_seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        self.arena.validate()?;
        self.kinematics.validate()?;
        self.reward.validate()?;
        self.noise.validate()?;
        if self.stack_n == 0 {
            return Err(Error::Config("stack_n must be >= 1".into()));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("episode_length must be >= 1".into()));
        }
        Ok(())
    }

    /// Length of the flat stacked observation vector.
    pub fn obs_len(&self) -> usize {
        OBS_DIM * self.stack_n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    AgentWin,
    EnemyWin,
    Crash,
    Timeout,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::AgentWin => "agent_win",
            Status::EnemyWin => "enemy_win",
            Status::Crash => "crash",
            Status::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs_agent: Vec<f64>,
    pub obs_enemy: Vec<f64>,
    pub reward_agent: f64,
    pub reward_enemy: f64,
    pub done: bool,
    pub status: Status,
}

/// One replay record of the agent side.
#[derive(Debug, Clone)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
}

/// Undiscounted sum of agent rewards over one episode.
pub fn episode_score(transitions: &[Transition]) -> f64 {
    transitions.iter().map(|t| t.r).sum()
}

pub struct Environment {
    cfg: EnvConfig,
    agent: AircraftState,
    enemy: AircraftState,
    agent_stack: StackBuffer,
    enemy_stack: StackBuffer,
    placement_rng: ChaCha8Rng,
    agent_noise_rng: ChaCha8Rng,
    enemy_noise_rng: ChaCha8Rng,
    step_count: u32,
    status: Status,
    /// Enemy pose as last perceived by the agent (noisy), for trace export.
    perceived_by_agent: AircraftState,
    perceived_by_enemy: AircraftState,
}

impl Environment {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let dummy = AircraftState::new(0.0, 0.0, 0.0, cfg.kinematics.v_min);
        let mut env = Self {
            agent: dummy,
            enemy: dummy,
            agent_stack: StackBuffer::new(cfg.stack_n)?,
            enemy_stack: StackBuffer::new(cfg.stack_n)?,
            placement_rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            agent_noise_rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x9E3779B97F4A7C15),
            enemy_noise_rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0xD1B54A32D192ED03),
            step_count: 0,
            status: Status::Running,
            perceived_by_agent: dummy,
            perceived_by_enemy: dummy,
            cfg,
        };
        env.reset()?;
        Ok(env)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    pub fn agent_state(&self) -> &AircraftState {
        &self.agent
    }

    pub fn enemy_state(&self) -> &AircraftState {
        &self.enemy
    }

    /// Noisy enemy pose behind the agent's most recent observation.
    pub fn perceived_by_agent(&self) -> &AircraftState {
        &self.perceived_by_agent
    }

    pub fn perceived_by_enemy(&self) -> &AircraftState {
        &self.perceived_by_enemy
    }

    fn random_pose(&mut self) -> AircraftState {
        let a = &self.cfg.arena;
        AircraftState {
            x: self.placement_rng.gen_range(a.x_min..a.x_max),
            y: self.placement_rng.gen_range(a.y_min..a.y_max),
            psi: self.placement_rng.gen_range(-180.0..180.0),
            v: self.cfg.kinematics.v_min,
        }
    }

    /// Observation of `target` from `observer`'s side, through the given
    /// noise stream. Returns the normalized observation and the corrupted
    /// pose it was derived from.
    fn observe(
        observer: &AircraftState,
        target: &AircraftState,
        cfg: &EnvConfig,
        rng: &mut ChaCha8Rng,
    ) -> Result<(Observation, AircraftState)> {
        let noisy = observation::corrupt_enemy(target, &cfg.noise, rng);
        let raw = observation::make_raw_observation(observer, &noisy, target.v)?;
        Ok((observation::normalize(&raw, &cfg.arena, &cfg.kinematics), noisy))
    }

    /// Start a fresh episode. Both aircraft are placed uniformly at random
    /// with random headings at minimum speed; placements closer than the
    /// crash distance are redrawn.
    pub fn reset(&mut self) -> Result<(Vec<f64>, Vec<f64>)> {
        loop {
            self.agent = self.random_pose();
            self.enemy = self.random_pose();
            let dx = self.agent.x - self.enemy.x;
            let dy = self.agent.y - self.enemy.y;
            if (dx * dx + dy * dy).sqrt() >= self.cfg.reward.crash_max {
                break;
            }
        }
        self.step_count = 0;
        self.status = Status::Running;

        let (obs_a, seen_a) =
            Self::observe(&self.agent, &self.enemy, &self.cfg, &mut self.agent_noise_rng)?;
        let (obs_e, seen_e) =
            Self::observe(&self.enemy, &self.agent, &self.cfg, &mut self.enemy_noise_rng)?;
        self.perceived_by_agent = seen_a;
        self.perceived_by_enemy = seen_e;
        self.agent_stack.reset(obs_a);
        self.enemy_stack.reset(obs_e);
        Ok((self.agent_stack.read()?, self.enemy_stack.read()?))
    }

    /// Advance both aircraft simultaneously by one step.
    pub fn step(&mut self, agent_action: usize, enemy_action: usize) -> Result<StepResult> {
        if self.status != Status::Running {
            return Err(Error::Contract("step called on a finished episode".into()));
        }
        let ca = sim::action_from_index(agent_action)?;
        let ce = sim::action_from_index(enemy_action)?;
        // Both successors are computed from both current states.
        let next_agent = sim::step_aircraft(self.agent, ca, &self.cfg.kinematics, &self.cfg.arena);
        let next_enemy = sim::step_aircraft(self.enemy, ce, &self.cfg.kinematics, &self.cfg.arena);
        self.agent = next_agent;
        self.enemy = next_enemy;
        self.step_count += 1;

        let g = sim::compute_geometry(&self.agent, &self.enemy)?;
        let reward_agent = reward::compute_reward(&g, &self.cfg.reward);
        let reward_enemy = reward::compute_reward(&g.role_swapped(), &self.cfg.reward);
        let outcome = reward::classify_outcome(&g, &self.cfg.reward);

        self.status = match outcome {
            Outcome::Crash => Status::Crash,
            Outcome::AgentAdvantage if self.cfg.terminate_on_advantage => Status::AgentWin,
            Outcome::EnemyAdvantage if self.cfg.terminate_on_advantage => Status::EnemyWin,
            _ if self.step_count >= self.cfg.episode_length => Status::Timeout,
            _ => Status::Running,
        };

        let (obs_a, seen_a) =
            Self::observe(&self.agent, &self.enemy, &self.cfg, &mut self.agent_noise_rng)?;
        let (obs_e, seen_e) =
            Self::observe(&self.enemy, &self.agent, &self.cfg, &mut self.enemy_noise_rng)?;
        self.perceived_by_agent = seen_a;
        self.perceived_by_enemy = seen_e;

        Ok(StepResult {
            obs_agent: self.agent_stack.push_and_read(obs_a)?,
            obs_enemy: self.enemy_stack.push_and_read(obs_e)?,
            reward_agent,
            reward_enemy,
            done: self.status != Status::Running,
            status: self.status,
        })
    }
}

/// Write the episode-trace CSV header for the given stack count.
pub fn write_trace_header<W: Write>(w: &mut W, stack_n: usize) -> Result<()> {
    let mut cols = vec![
        "step".to_string(),
        "agent_x".into(),
        "agent_y".into(),
        "agent_psi".into(),
        "agent_v".into(),
        "enemy_x".into(),
        "enemy_y".into(),
        "enemy_psi".into(),
        "enemy_v".into(),
        "perceived_enemy_x".into(),
        "perceived_enemy_y".into(),
        "perceived_enemy_psi".into(),
        "perceived_agent_x".into(),
        "perceived_agent_y".into(),
        "perceived_agent_psi".into(),
    ];
    for side in ["obs_agent", "obs_enemy"] {
        for k in 0..OBS_DIM * stack_n {
            cols.push(format!("{side}_{k}"));
        }
    }
    cols.extend(
        ["action_agent", "action_enemy", "reward_agent", "reward_enemy", "status"]
            .map(String::from),
    );
    writeln!(w, "{}", cols.join(","))?;
    Ok(())
}

/// One row of the episode trace, written after a step has been taken.
pub fn write_trace_row<W: Write>(
    w: &mut W,
    env: &Environment,
    result: &StepResult,
    agent_action: usize,
    enemy_action: usize,
) -> Result<()> {
    let a = env.agent_state();
    let e = env.enemy_state();
    let pa = env.perceived_by_agent();
    let pe = env.perceived_by_enemy();
    let mut row = vec![
        env.step_count().to_string(),
        a.x.to_string(),
        a.y.to_string(),
        a.psi.to_string(),
        a.v.to_string(),
        e.x.to_string(),
        e.y.to_string(),
        e.psi.to_string(),
        e.v.to_string(),
        pa.x.to_string(),
        pa.y.to_string(),
        pa.psi.to_string(),
        pe.x.to_string(),
        pe.y.to_string(),
        pe.psi.to_string(),
    ];
    row.extend(result.obs_agent.iter().map(|v| v.to_string()));
    row.extend(result.obs_enemy.iter().map(|v| v.to_string()));
    row.push(agent_action.to_string());
    row.push(enemy_action.to_string());
    row.push(result.reward_agent.to_string());
    row.push(result.reward_enemy.to_string());
    row.push(result.status.as_str().to_string());
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}
