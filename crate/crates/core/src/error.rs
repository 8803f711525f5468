use thiserror::Error;

/// Errors raised by the geometry, calculus, solver and lab layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("chart switch at the pole: coordinate 0 has no image in the other chart")]
    ChartPole,

    #[error("sampled function carries no closure; M-direction derivatives need one")]
    NoClosure,

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("grid too small: {axis} axis has {have} nodes, need at least {need}")]
    GridTooSmall { axis: &'static str, have: usize, need: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("chart tearing between nodes ({s0},{t0}) and ({s1},{t1}): chordal jump {jump:.3}")]
    ChartTearing { s0: usize, t0: usize, s1: usize, t1: usize, jump: f64 },

    #[error("perturbation is not properly exact: {0}")]
    NotProperlyExact(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("invalid solution family: {0}")]
    InvalidFamily(String),

    #[error("singular discrete operator: zero pivot at column {column}")]
    SingularOperator { column: usize },

    #[error("newton solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid homotopy schedule: {0}")]
    InvalidSchedule(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("unknown series `{0}`")]
    UnknownSeries(String),

    #[error("report has no rows")]
    EmptyReport,

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
