use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid runner parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid glyc curve: {0}")]
    InvalidCurve(String),

    #[error("velocity ratio {0} is negative")]
    NegativeRatio(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("nutrition strategy index {0} out of range (0..=15)")]
    StrategyIndex(usize),

    #[error("nutrition event at t={time} min lies outside [0, {horizon}]")]
    EventOutsideHorizon { time: f64, horizon: f64 },

    #[error("invalid nutrition event: {0}")]
    InvalidEvent(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("boundary force undefined: {0}")]
    BoundaryForce(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
