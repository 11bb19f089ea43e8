use thiserror::Error;

/// Errors raised by the mesh, solver and functional layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MslabError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("triangle ({n},{i}) is outside the mesh")]
    TriangleOutOfRange { n: usize, i: usize },

    #[error("stencil at node ({n},{i}) is outside the mesh")]
    StencilOutOfRange { n: usize, i: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid boundary data: {0}")]
    InvalidBoundaryData(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular system (reciprocal condition estimate {rcond:.3e})")]
    SingularSystem { rcond: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("incompatible boundary data (residual {residual:.3e})")]
    IncompatibleData { residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MslabError>;
