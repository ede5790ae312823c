//! Dueling double-DQN training loop: epsilon-greedy acting, uniform replay,
//! double-DQN bootstrap targets, and hard target-network syncs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::env::{EnvConfig, Environment, Transition};
use crate::net::{AdamState, QNet};
use crate::policy::epsilon_at;
use crate::replay::ReplayBuffer;
use crate::selfplay::{OpponentPool, SelfPlayConfig};
use crate::sim::NUM_ACTIONS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Learner steps between hard online -> target copies.
    pub target_update_every: u64,
    pub eps_initial: f64,
    pub eps_final: f64,
    pub eps_anneal_steps: u64,
    pub total_timesteps: u64,
    /// Width of both hidden layers.
    pub hidden_dim: usize,
    /// Use the Huber loss instead of plain MSE. Off by default.
    pub huber_loss: bool,
    /// Environment steps between checkpoint callbacks; 0 disables.
    pub checkpoint_every: u64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            gamma: 0.99,
            replay_capacity: 20_000,
            batch_size: 32,
            target_update_every: 10_000,
            eps_initial: 1.0,
            eps_final: 0.05,
            eps_anneal_steps: 100_000,
            total_timesteps: 0,
            hidden_dim: 128,
            huber_loss: false,
            checkpoint_every: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.gamma > 0.0
            && self.gamma <= 1.0
            && self.eps_final > 0.0
            && self.eps_final <= self.eps_initial
            && self.eps_initial <= 1.0
            && self.batch_size >= 1
            && self.batch_size <= self.replay_capacity
            && self.eps_anneal_steps >= 1
            && self.target_update_every >= 1
            && self.hidden_dim >= 1
            && self.total_timesteps >= 1;
        if !ok {
            return Err(Error::Config(format!("invalid training config: {self:?}")));
        }
        Ok(())
    }
}

/// Double-DQN bootstrap target: the online network selects the successor
/// action, the target network evaluates it.
pub fn double_dqn_target(
    online: &QNet,
    target: &QNet,
    t: &Transition,
    gamma: f64,
) -> Result<f64> {
    if t.done {
        return Ok(t.r);
    }
    let a_star = online.greedy_action(&t.s_next)?;
    let q_target = target.forward(&t.s_next)?;
    Ok(t.r + gamma * q_target[a_star])
}

/// One completed episode in the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub index: u64,
    /// Environment step at which the episode ended.
    pub end_step: u64,
    pub score: f64,
    pub steps: u32,
}

/// Per-run training log: episode scores plus self-play swap events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeRecord>,
    /// (environment step, swap ordinal) for each opponent snapshot swap.
    pub swaps: Vec<(u64, u64)>,
}

impl TrainLog {
    pub fn scores(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.score).collect()
    }
}

pub struct TrainOutcome {
    pub net: QNet,
    pub log: TrainLog,
    pub learner_steps: u64,
}

/// Periodic checkpoint sink, called with the current environment step.
pub type CheckpointSink<'a> = &'a mut dyn FnMut(u64, &QNet, &TrainLog) -> Result<()>;

/// Warm-start state for resuming from a checkpoint: the saved parameters and
/// the environment step the checkpoint was taken at (drives the exploration
/// schedule). Replay memory and optimizer state start fresh.
pub struct TrainInit {
    pub net: QNet,
    pub start_step: u64,
}

/// Run the full training loop on a freshly constructed environment.
///
/// Without a self-play config the enemy takes uniform random actions for the
/// whole run; with one, it plays the lambda-mixed frozen snapshot, starting
/// from a copy of the untrained learner.
pub fn train(
    env_cfg: &EnvConfig,
    cfg: &TrainConfig,
    selfplay: Option<SelfPlayConfig>,
    mut checkpoint_sink: Option<CheckpointSink<'_>>,
    init: Option<TrainInit>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if let Some(sp) = &selfplay {
        sp.validate()?;
    }
    let mut env = Environment::new(*env_cfg)?;
    let input_dim = env_cfg.obs_len();
    let start_step = init.as_ref().map_or(0, |i| i.start_step);
    let mut online = match init {
        Some(i) => {
            if i.net.input_dim() != input_dim {
                return Err(Error::Shape {
                    expected: input_dim,
                    got: i.net.input_dim(),
                    context: "resume checkpoint input width vs stack_n".into(),
                });
            }
            i.net
        }
        None => QNet::new(input_dim, cfg.hidden_dim, cfg.seed),
    };
    let mut target = online.clone();
    let mut opt = AdamState::new(&online);
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut pool = OpponentPool::new(&online);
    let mut act_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51AB_3C5E_D61F_0A84);
    let mut enemy_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7E46_9D0B_22C8_FF31);
    let mut sample_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1159_62E6_4D0C_87BA);

    let mut log = TrainLog::default();
    let (mut obs_a, mut obs_e) = env.reset()?;
    let mut ep_score = 0.0;
    let mut ep_steps = 0u32;
    let mut ep_index = 0u64;
    let mut learner_steps = 0u64;

    for step in start_step..start_step + cfg.total_timesteps {
        let eps = epsilon_at(step, cfg);
        let action = if act_rng.gen::<f64>() < eps {
            act_rng.gen_range(0..NUM_ACTIONS)
        } else {
            online.greedy_action(&obs_a)?
        };
        let enemy_action = match &selfplay {
            Some(sp) => pool.enemy_action(&obs_e, sp.lambda, &mut enemy_rng)?,
            None => enemy_rng.gen_range(0..NUM_ACTIONS),
        };
        let res = env.step(action, enemy_action)?;
        replay.push(Transition {
            s: std::mem::take(&mut obs_a),
            a: action,
            r: res.reward_agent,
            s_next: res.obs_agent.clone(),
            done: res.done,
        });
        ep_score += res.reward_agent;
        ep_steps += 1;

        if replay.len() >= cfg.batch_size {
            let batch = replay.sample(cfg.batch_size, &mut sample_rng);
            let mut targets = Vec::with_capacity(cfg.batch_size);
            for t in &batch {
                targets.push(double_dqn_target(&online, &target, t, cfg.gamma)?);
            }
            let refs: Vec<(&[f64], usize)> =
                batch.iter().map(|t| (t.s.as_slice(), t.a)).collect();
            let (loss, grads) = online.loss_and_gradients(&refs, &targets)?;
            if !loss.is_finite() {
                // The online net still holds the last finite parameters.
                if let Some(sink) = checkpoint_sink.as_mut() {
                    sink(step, &online, &log)?;
                }
                return Err(Error::Divergence { step, detail: format!("loss {loss}") });
            }
            let update = opt.apply_update(&mut online, &grads, cfg.learning_rate);
            if let Err(e) = update {
                if let Some(sink) = checkpoint_sink.as_mut() {
                    sink(step, &online, &log)?;
                }
                return Err(e);
            }
            learner_steps += 1;
            if learner_steps % cfg.target_update_every == 0 {
                target = online.clone();
            }
        }

        if let Some(sp) = &selfplay {
            if pool.maybe_swap(&online, step + 1, sp.swap_every) {
                log.swaps.push((step + 1, log.swaps.len() as u64 + 1));
            }
        }

        if res.done {
            log.episodes.push(EpisodeRecord {
                index: ep_index,
                end_step: step + 1,
                score: ep_score,
                steps: ep_steps,
            });
            ep_index += 1;
            ep_score = 0.0;
            ep_steps = 0;
            let (oa, oe) = env.reset()?;
            obs_a = oa;
            obs_e = oe;
        } else {
            obs_a = res.obs_agent;
            obs_e = res.obs_enemy;
        }

        if cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 {
            if let Some(sink) = checkpoint_sink.as_mut() {
                sink(step + 1, &online, &log)?;
            }
        }
    }

    Ok(TrainOutcome { net: online, log, learner_steps })
}
