use thiserror::Error;

/// Errors surfaced by problem construction and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The weighted quadratic subproblem has no unique minimizer on the
    /// homogenization hyperplane, usually because too few correspondences
    /// carry weight or the source points are collinear.
    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("insufficient data: need at least {required} correspondences, got {got}")]
    InsufficientData { required: usize, got: usize },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed point cloud: {0}")]
    Parse(String),
}

impl Error {
    /// Stable short code, used in CSV output and by foreign bindings.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::DegenerateProblem(_) => "degenerate-problem",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
