use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid degree distribution: {0}")]
    InvalidDistribution(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// Ball growth exceeded the vertex cap. `depth` is the generation being
    /// expanded when the cap was hit.
    #[error("tree growth exceeded {max_vertices} vertices while expanding depth {depth}")]
    GrowthCap { depth: u32, max_vertices: usize },

    #[error("replicate {replicate}: {source}")]
    Replicate {
        replicate: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("graph has {vertices} vertices; the exact solver accepts at most {max}")]
    OracleTooLarge { vertices: usize, max: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDistribution(_)
            | Error::Domain(_)
            | Error::InvalidTree(_)
            | Error::OracleTooLarge { .. }
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::Json(_) => 1,
            Error::GrowthCap { .. } | Error::Replicate { .. } | Error::Solver(_) | Error::Io(_) => 2,
        }
    }
}
