use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field does not match grid: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Hessian of L_eps is singular at w = 0 when eps = 0 and p < 4")]
    SingularPoint,
    #[error("interior mask for delta = {delta} is empty")]
    EmptyMask { delta: f64 },
    #[error("empty shift family")]
    EmptyShifts,
    #[error("need at least {needed} usable shift lengths for exponent fitting, found {found}")]
    InsufficientShifts { needed: usize, found: usize },
    #[error("boundary values of u differ from the Dirichlet trace at node {node}")]
    BoundaryMismatch { node: usize },
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed file: {0}")]
    Format(String),
}
