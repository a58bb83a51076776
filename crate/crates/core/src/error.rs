use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {}", .0.join("; "))]
    InvalidScenario(Vec<String>),

    #[error("genome has {found} genes but the layout expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("schedule does not match layout: {0}")]
    ScheduleMismatch(String),

    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),

    #[error("EV {ev_id}: {reason}")]
    BaselineInfeasible { ev_id: usize, reason: String },

    #[error(
        "occupancy profile cannot be produced by {stay}-slot stays; residual at slots {slots:?}"
    )]
    InfeasibleOccupancy { stay: usize, slots: Vec<usize> },

    #[error("unknown problem set {0} (expected 1..=4)")]
    UnknownProblemSet(u8),

    #[error("malformed base load file: {0}")]
    BaseLoadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
