//! Point-mass aircraft kinematics, discrete action decoding, and combat
//! geometry (distance, antenna train angle, aspect angle) on true states.
//!
//! Angles are degrees everywhere outside of trigonometric evaluation and are
//! kept wrapped to the half-open interval `[-180, 180)`.

use crate::{Error, Result};

/// True pose of one aircraft.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AircraftState {
    /// Position along x, meters.
    pub x: f64,
    /// Position along y, meters.
    pub y: f64,
    /// Bank/heading angle, degrees in `[-180, 180)`.
    pub psi: f64,
    /// Speed, meters per step, clipped to `[v_min, v_max]`.
    pub v: f64,
}

impl AircraftState {
    pub fn new(x: f64, y: f64, psi: f64, v: f64) -> Self {
        Self {
            x,
            y,
            psi: wrap_angle(psi).expect("finite angle"),
            v,
        }
    }
}

/// Per-step control increments and speed limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsParams {
    /// Heading change per action step, degrees.
    pub delta_psi: f64,
    /// Speed change per action step, m/s.
    pub delta_v: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Default for KinematicsParams {
    fn default() -> Self {
        Self {
            delta_psi: 10.0,
            delta_v: 0.1,
            v_min: 4.0,
            v_max: 8.0,
        }
    }
}

impl KinematicsParams {
    pub fn validate(&self) -> Result<()> {
        if self.delta_psi <= 0.0 || self.delta_v <= 0.0 || self.v_min >= self.v_max {
            return Err(Error::Config(format!(
                "invalid kinematics: delta_psi={}, delta_v={}, v_min={}, v_max={}",
                self.delta_psi, self.delta_v, self.v_min, self.v_max
            )));
        }
        Ok(())
    }
}

/// One of the nine discrete control combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionCommand {
    /// Speed change sign: -1, 0, or +1.
    pub dv_sign: i8,
    /// Heading change sign: -1, 0, or +1.
    pub dpsi_sign: i8,
}

/// Number of discrete actions.
pub const NUM_ACTIONS: usize = 9;

/// Rectangular flight arena; positions are hard-clamped at the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Arena {
    fn default() -> Self {
        // 500 m x 500 m closed box centered at the origin.
        Self {
            x_min: -250.0,
            x_max: 250.0,
            y_min: -250.0,
            y_max: 250.0,
        }
    }
}

impl Arena {
    pub fn centered(width: f64, height: f64) -> Self {
        Self {
            x_min: -width / 2.0,
            x_max: width / 2.0,
            y_min: -height / 2.0,
            y_max: height / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(Error::Config(format!(
                "invalid arena: [{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }

    pub fn diagonal(&self) -> f64 {
        let w = self.x_max - self.x_min;
        let h = self.y_max - self.y_min;
        (w * w + h * h).sqrt()
    }

    pub fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        (x.clamp(self.x_min, self.x_max), y.clamp(self.y_min, self.y_max))
    }
}

/// Relative combat geometry between the two aircraft.
///
/// `ata_a` is the angle from the agent's heading to the enemy's position,
/// `aa_a` the angle between the enemy's tail and the line of sight as seen
/// from the agent. The `_e` fields are the same quantities with roles swapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombatGeometry {
    pub r: f64,
    pub ata_a: f64,
    pub ata_e: f64,
    pub aa_a: f64,
    pub aa_e: f64,
}

impl CombatGeometry {
    /// The same geometry as seen from the enemy's side.
    pub fn role_swapped(&self) -> Self {
        Self {
            r: self.r,
            ata_a: self.ata_e,
            ata_e: self.ata_a,
            aa_a: self.aa_e,
            aa_e: self.aa_a,
        }
    }
}

/// Wrap an angle in degrees into `[-180, 180)`.
pub fn wrap_angle(deg: f64) -> Result<f64> {
    if !deg.is_finite() {
        return Err(Error::Contract(format!("non-finite angle: {deg}")));
    }
    Ok(wrap(deg))
}

/// Infallible wrap for values already known finite. In-range inputs pass
/// through bit-exactly.
pub(crate) fn wrap(deg: f64) -> f64 {
    if (-180.0..180.0).contains(&deg) {
        return deg;
    }
    let mut a = deg.rem_euclid(360.0);
    if a >= 180.0 {
        a -= 360.0;
    }
    a
}

/// Decode an action index into the command pair.
///
/// Row-major over the 3x3 action matrix: rows are the heading level
/// (+1, 0, -1 top to bottom), columns the speed level (-1, 0, +1 left to
/// right). Index 4 is the no-op.
pub fn action_from_index(i: usize) -> Result<ActionCommand> {
    if i >= NUM_ACTIONS {
        return Err(Error::Contract(format!("action index {i} out of range 0..9")));
    }
    let row = i / 3;
    let col = i % 3;
    Ok(ActionCommand {
        dpsi_sign: 1 - row as i8,
        dv_sign: col as i8 - 1,
    })
}

/// Advance one aircraft by one time step.
///
/// Heading updates first, then speed (clipped), then the position advances
/// with the updated heading and speed. The position is clamped to the arena
/// afterwards.
pub fn step_aircraft(
    s: AircraftState,
    a: ActionCommand,
    p: &KinematicsParams,
    arena: &Arena,
) -> AircraftState {
    let psi = wrap(s.psi + f64::from(a.dpsi_sign) * p.delta_psi);
    let v = (s.v + f64::from(a.dv_sign) * p.delta_v).clamp(p.v_min, p.v_max);
    let rad = psi.to_radians();
    let (x, y) = arena.clamp(s.x + v * rad.cos(), s.y + v * rad.sin());
    AircraftState { x, y, psi, v }
}

/// Planar bearing from `(x0, y0)` to `(x1, y1)`, degrees in `[-180, 180)`.
fn bearing(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<f64> {
    let (dx, dy) = (x1 - x0, y1 - y0);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(wrap(dy.atan2(dx).to_degrees()))
}

/// Antenna train angle: bearing to the other aircraft minus own heading.
pub fn compute_ata(
    own_x: f64,
    own_y: f64,
    other_x: f64,
    other_y: f64,
    own_psi: f64,
) -> Result<f64> {
    Ok(wrap(bearing(own_x, own_y, other_x, other_y)? - own_psi))
}

/// Aspect angle: bearing from the agent to the enemy minus the enemy's
/// heading. Zero when the enemy flies directly away along the line of sight.
pub fn compute_aa(
    agent_x: f64,
    agent_y: f64,
    enemy_x: f64,
    enemy_y: f64,
    enemy_psi: f64,
) -> Result<f64> {
    Ok(wrap(bearing(agent_x, agent_y, enemy_x, enemy_y)? - enemy_psi))
}

/// Full combat geometry between agent and enemy.
pub fn compute_geometry(agent: &AircraftState, enemy: &AircraftState) -> Result<CombatGeometry> {
    let (dx, dy) = (enemy.x - agent.x, enemy.y - agent.y);
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    let r = (dx * dx + dy * dy).sqrt();
    Ok(CombatGeometry {
        r,
        ata_a: compute_ata(agent.x, agent.y, enemy.x, enemy.y, agent.psi)?,
        ata_e: compute_ata(enemy.x, enemy.y, agent.x, agent.y, enemy.psi)?,
        aa_a: compute_aa(agent.x, agent.y, enemy.x, enemy.y, enemy.psi)?,
        aa_e: compute_aa(enemy.x, enemy.y, agent.x, agent.y, agent.psi)?,
    })
}
