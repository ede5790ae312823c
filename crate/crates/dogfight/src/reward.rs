//! Continuous engagement reward and the positional outcome classifier used
//! for termination and win/lose bookkeeping.

use crate::sim::CombatGeometry;
use crate::{Error, Result};

/// Gate distances and angles for the reward branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Lower edge of the crash band, meters.
    pub crash_min: f64,
    /// Upper (exclusive) edge of the crash band, meters.
    pub crash_max: f64,
    /// Upper (inclusive) edge of the engagement band, meters.
    pub engage_max: f64,
    /// Antenna-train-angle gate, degrees (inclusive).
    pub ata_gate: f64,
    /// Aspect-angle gate, degrees (exclusive).
    pub aa_gate: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            crash_min: 0.0,
            crash_max: 10.0,
            engage_max: 100.0,
            ata_gate: 30.0,
            aa_gate: 60.0,
        }
    }
}

impl RewardParams {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 <= self.crash_min
            && self.crash_min < self.crash_max
            && self.crash_max <= self.engage_max
            && self.ata_gate > 0.0
            && self.aa_gate > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid reward params: {self:?}")));
        }
        Ok(())
    }
}

/// Positional classification of one geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Crash,
    AgentAdvantage,
    EnemyAdvantage,
    Neutral,
}

/// Classify a geometry. Crash takes precedence; inside the engagement band
/// the agent-advantage gate is checked before the enemy's, so a simultaneous
/// head-on satisfaction resolves to `AgentAdvantage`.
pub fn classify_outcome(g: &CombatGeometry, p: &RewardParams) -> Outcome {
    if g.r >= p.crash_min && g.r < p.crash_max {
        Outcome::Crash
    } else if g.r >= p.crash_max && g.r <= p.engage_max {
        if g.ata_a.abs() <= p.ata_gate && g.aa_a.abs() < p.aa_gate {
            Outcome::AgentAdvantage
        } else if g.ata_e.abs() <= p.ata_gate && g.aa_e.abs() < p.aa_gate {
            Outcome::EnemyAdvantage
        } else {
            Outcome::Neutral
        }
    } else {
        Outcome::Neutral
    }
}

/// Continuous reward in `[-1, 1]` for the agent side.
pub fn compute_reward(g: &CombatGeometry, p: &RewardParams) -> f64 {
    match classify_outcome(g, p) {
        Outcome::Crash => -1.0,
        Outcome::AgentAdvantage => 1.0 - g.ata_a.abs() / p.ata_gate,
        Outcome::EnemyAdvantage => g.ata_e.abs() / p.ata_gate - 1.0,
        Outcome::Neutral => 0.0,
    }
}
