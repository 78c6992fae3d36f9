use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: (dim {ld}, rank {lr}) vs (dim {rd}, rank {rr})")]
    ShapeMismatch {
        op: &'static str,
        ld: usize,
        lr: usize,
        rd: usize,
        rr: usize,
    },

    #[error("degree mismatch: expected degree {expected}, found a term of degree {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("form is not nilpotent: {0}")]
    NotNilpotent(String),

    #[error("invalid connection: {0}")]
    InvalidConnection(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("invalid gauge map: {0}")]
    InvalidGauge(String),

    #[error("operation requires a constant connection: {0}")]
    NotConstant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the domain of definition: {0}")]
    Domain(String),

    #[error("truncation of size {size} exceeds the configured limit {limit}")]
    MemoryGuard { size: usize, limit: usize },

    #[error("eigensolver failed: {0}")]
    EigenSolver(String),

    #[error("eigenvalue matching unresolved on [{t0}, {t1}] after {depth} bisections: {detail}")]
    AmbiguousMatching {
        t0: f64,
        t1: f64,
        depth: usize,
        detail: String,
    },

    #[error("eigenvalue {re}{im:+}i at t = {t} lies on the imaginary axis; perturb the endpoint")]
    EndpointOnAxis { t: f64, re: f64, im: f64 },

    #[error("heat-kernel eta estimate needs a formally self-adjoint truncation")]
    NotSelfAdjoint,

    #[error("scenario schema violation: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the batch runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Json(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
