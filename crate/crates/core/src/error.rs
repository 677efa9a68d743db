use std::path::PathBuf;

use crate::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory has zero length")]
    ZeroLengthTrajectory,

    #[error("trajectory needs at least {needed} waypoints, got {got}")]
    TooFewWaypoints { needed: usize, got: usize },

    #[error("waypoint index {index} out of range for second difference (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cost function returned NaN at {position:?}")]
    NanCost { position: Vec<f64> },

    #[error("no feasible UAV configuration found (best infeasible min separation {best_separation:.3})")]
    Infeasible { best: Vec<Vec2>, best_separation: f64 },

    #[error("could not spawn a collision-free episode after {attempts} attempts")]
    InfeasibleSpawn { attempts: usize },

    #[error("step called on a finished episode")]
    EpisodeDone,

    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("zero-magnitude velocity in formation reward")]
    ZeroVelocity,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("training diverged at episode {episode}: {reason}")]
    Diverged { episode: usize, reason: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
