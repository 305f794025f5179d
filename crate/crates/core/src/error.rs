use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("graph has edges but no transversal cliques")]
    NoCliques,

    #[error("graph is not K_r-divisible: {0}")]
    Divisibility(String),

    #[error("helper family is empty for {0}")]
    GadgetInfeasible(String),

    #[error("no eligible partner vertex in the target set for {0}")]
    EmptyIntersection(String),

    #[error("intermediate set too small in class {class}: {available} eligible, {required} required")]
    IntermediateSetTooSmall {
        class: usize,
        available: usize,
        required: usize,
    },

    #[error("vertex set in class {0} is not neighbour-rich")]
    NotNeighbourRich(usize),

    #[error("instance too large: {0}")]
    SizeLimit(String),

    #[error("weighting does not match the clique index: {0}")]
    IndexMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error once stage tags are peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
