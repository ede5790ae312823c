//! Noisy close-range one-on-one air combat as a two-player POMDP, with a
//! dueling double-DQN learner, observation stacking for noise reduction,
//! frozen-copy self-play, and Monte Carlo tournament evaluation.

pub mod checkpoint;
pub mod config;
pub mod env;
pub mod eval;
pub mod learner;
pub mod net;
pub mod observation;
pub mod plot;
pub mod policy;
pub mod replay;
pub mod reward;
pub mod selfplay;
pub mod sim;

use thiserror::Error;

/// Errors surfaced by the simulation and training stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate geometry: the two aircraft positions coincide")]
    DegenerateGeometry,
    #[error("shape mismatch: expected {expected}, got {got} ({context})")]
    Shape {
        expected: usize,
        got: usize,
        context: String,
    },
    #[error("training diverged at step {step}: {detail}")]
    Divergence { step: u64, detail: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
