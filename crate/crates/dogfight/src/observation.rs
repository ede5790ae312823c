//! Noisy, normalized 7-component observations and the stacked-observation
//! ring buffer.
//!
//! The observer never sees the enemy's true pose. Gaussian noise is injected
//! into the enemy's position and heading once per step, and distance and both
//! relative angles are derived from that single corrupted pose so the
//! components stay mutually consistent.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::sim::{self, AircraftState, Arena, KinematicsParams};
use crate::{Error, Result};

/// Number of scalar components in one observation.
pub const OBS_DIM: usize = 7;

/// Gaussian noise configuration. The second parameter of each distribution is
/// a variance, not a standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub mu: f64,
    /// Variance of the position noise on each axis, meters^2.
    pub var_xy: f64,
    /// Variance of the heading noise, degrees^2.
    pub var_psi: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { mu: 0.0, var_xy: 0.0, var_psi: 0.0 }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if self.var_xy < 0.0 || self.var_psi < 0.0 {
            return Err(Error::Config(format!("negative noise variance: {self:?}")));
        }
        Ok(())
    }
}

/// Unnormalized observation: distance, the two antenna train angles, both
/// headings, both speeds, in that order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawObservation {
    pub r_hat: f64,
    pub ata_a_hat: f64,
    pub ata_e_hat: f64,
    pub psi_a: f64,
    pub psi_e_hat: f64,
    pub v_a: f64,
    pub v_e: f64,
}

/// Normalized observation; every component lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

/// Replace the enemy's position and heading with noisy versions. Speed passes
/// through untouched and the corrupted position is not clamped to the arena:
/// the perceived ghost may sit outside the box.
pub fn corrupt_enemy<R: Rng>(enemy: &AircraftState, nm: &NoiseModel, rng: &mut R) -> AircraftState {
    let pos = Normal::new(nm.mu, nm.var_xy.sqrt()).expect("valid normal");
    let ang = Normal::new(nm.mu, nm.var_psi.sqrt()).expect("valid normal");
    AircraftState {
        x: enemy.x + pos.sample(rng),
        y: enemy.y + pos.sample(rng),
        psi: sim::wrap(enemy.psi + ang.sample(rng)),
        v: enemy.v,
    }
}

/// Assemble the 7-component raw observation from the agent's true state and
/// the corrupted enemy pose. The enemy speed is observed noise-free.
pub fn make_raw_observation(
    agent: &AircraftState,
    noisy_enemy: &AircraftState,
    true_enemy_v: f64,
) -> Result<RawObservation> {
    let g = sim::compute_geometry(agent, noisy_enemy)?;
    Ok(RawObservation {
        r_hat: g.r,
        ata_a_hat: g.ata_a,
        ata_e_hat: g.ata_e,
        psi_a: agent.psi,
        psi_e_hat: noisy_enemy.psi,
        v_a: agent.v,
        v_e: true_enemy_v,
    })
}

fn unit_clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Map a raw observation into `[0, 1]^7`: distance against the arena
/// diagonal, angles against the full circle, speeds against `[v_min, v_max]`.
pub fn normalize(raw: &RawObservation, arena: &Arena, p: &KinematicsParams) -> Observation {
    let diag = arena.diagonal();
    let angle = |a: f64| unit_clip((a + 180.0) / 360.0);
    let speed = |v: f64| unit_clip((v - p.v_min) / (p.v_max - p.v_min));
    Observation([
        unit_clip(raw.r_hat / diag),
        angle(raw.ata_a_hat),
        angle(raw.ata_e_hat),
        angle(raw.psi_a),
        angle(raw.psi_e_hat),
        speed(raw.v_a),
        speed(raw.v_e),
    ])
}

/// Ring buffer holding the `n` most recent observations of one observer.
#[derive(Debug, Clone)]
pub struct StackBuffer {
    n: usize,
    ring: Vec<Observation>,
    /// Index of the newest entry; `None` until the first reset.
    head: Option<usize>,
}

impl StackBuffer {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("stack count must be positive".into()));
        }
        Ok(Self { n, ring: Vec::with_capacity(n), head: None })
    }

    pub fn stack_n(&self) -> usize {
        self.n
    }

    /// Fill every slot with `first`, discarding any previous episode's
    /// contents.
    pub fn reset(&mut self, first: Observation) {
        self.ring.clear();
        self.ring.resize(self.n, first);
        self.head = Some(0);
    }

    /// Push a new observation, evict the oldest, and return the flat
    /// newest-first concatenation of all `7 * n` scalars.
    pub fn push_and_read(&mut self, o: Observation) -> Result<Vec<f64>> {
        let head = self
            .head
            .ok_or_else(|| Error::Contract("stack buffer read before reset".into()))?;
        let head = (head + self.n - 1) % self.n;
        self.ring[head] = o;
        self.head = Some(head);
        Ok(self.read_flat(head))
    }

    /// Flat newest-first read without pushing.
    pub fn read(&self) -> Result<Vec<f64>> {
        let head = self
            .head
            .ok_or_else(|| Error::Contract("stack buffer read before reset".into()))?;
        Ok(self.read_flat(head))
    }

    fn read_flat(&self, head: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(OBS_DIM * self.n);
        for k in 0..self.n {
            out.extend_from_slice(&self.ring[(head + k) % self.n].0);
        }
        out
    }
}
