use thiserror::Error;

use crate::geom::{ArenaRect, CuboidObstacle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("invalid arena {0:?}: bounds must be finite with min < max")]
    InvalidArena(ArenaRect),
    #[error("invalid obstacle {0:?}: need finite fields, l >= w > 0 and h > 0")]
    InvalidObstacle(CuboidObstacle),
    #[error("flight segment endpoints must be finite and distinct")]
    DegenerateSegment,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("no mission segment crosses both the top (y = {y_max}) and bottom (y = {y_min}) borders of the arena")]
    NoSoi { y_min: f64, y_max: f64 },
    #[error("first-obstacle sampling exhausted after {0} draws")]
    SamplingExhausted(usize),
    #[error("no contained, non-overlapping position for the second obstacle")]
    PlacementFailed,
    #[error("invalid mission: {0}")]
    InvalidMission(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
