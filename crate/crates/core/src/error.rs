use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Map parameters or a shuffle/point that does not fit them.
    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("point is not in the expected domain: {0}")]
    Domain(String),

    /// Division by a vanishing quantity (zero sum, zero last coordinate, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("region {0} is not defined for these parameters")]
    UnsupportedRegion(&'static str),

    #[error("matrix kind mismatch: {0}")]
    MatrixKind(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A proved identity failed at runtime. This is a bug or an arithmetic
    /// overflow, never an expected outcome.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("sampling exhausted after {tries} draws for region {region}")]
    SamplingExhausted { region: &'static str, tries: u64 },

    #[error("cannot parse exact number {0:?}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
