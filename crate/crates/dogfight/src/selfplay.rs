//! Frozen-copy self-play: the enemy acts from a periodic snapshot of the
//! learner, mixed with uniform random actions at rate lambda.

use rand::Rng;

use crate::net::QNet;
use crate::sim::NUM_ACTIONS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfPlayConfig {
    /// Environment steps between snapshot swaps.
    pub swap_every: u64,
    /// Enemy random-action probability.
    pub lambda: f64,
}

impl Default for SelfPlayConfig {
    fn default() -> Self {
        Self { swap_every: 50_000, lambda: 0.0 }
    }
}

impl SelfPlayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swap_every == 0 || !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("invalid self-play config: {self:?}")));
        }
        Ok(())
    }
}

/// Holds the current frozen opponent snapshot.
#[derive(Debug, Clone)]
pub struct OpponentPool {
    snapshot: QNet,
    snapshot_step: u64,
}

impl OpponentPool {
    /// The initial opponent is a snapshot of the learner at step 0.
    pub fn new(learner: &QNet) -> Self {
        Self { snapshot: learner.clone(), snapshot_step: 0 }
    }

    pub fn snapshot(&self) -> &QNet {
        &self.snapshot
    }

    pub fn snapshot_step(&self) -> u64 {
        self.snapshot_step
    }

    /// Replace the snapshot with a deep copy of the learner when
    /// `global_step` is a positive multiple of `swap_every`.
    pub fn maybe_swap(&mut self, learner: &QNet, global_step: u64, swap_every: u64) -> bool {
        if global_step > 0 && global_step % swap_every == 0 {
            self.snapshot = learner.clone();
            self.snapshot_step = global_step;
            true
        } else {
            false
        }
    }

    /// Lambda-mixed greedy action from the frozen snapshot.
    pub fn enemy_action<R: Rng>(&self, obs: &[f64], lambda: f64, rng: &mut R) -> Result<usize> {
        if rng.gen::<f64>() < lambda {
            Ok(rng.gen_range(0..NUM_ACTIONS))
        } else {
            self.snapshot.greedy_action(obs)
        }
    }
}
