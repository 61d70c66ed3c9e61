use thiserror::Error;

/// Errors raised by graph construction, simulation, and the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },
    #[error("edge index {index} out of range for {m} edges")]
    EdgeOutOfRange { index: usize, m: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("{what} needs at most {limit} vertices, got {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("epsilon out of range: {0}")]
    EpsilonOutOfRange(f64),
    #[error("invalid opinion configuration: {0}")]
    InvalidOpinions(String),
    #[error("invalid coloring: {0}")]
    InvalidColoring(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by the environment rather than by the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
