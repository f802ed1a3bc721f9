use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sublab::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use sublab::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                E::Resource(_) | E::SamplingExhausted { .. } => EXIT_RESOURCE,
                E::Invariant(_) => EXIT_INVARIANT,
                _ => EXIT_USAGE,
            },
            CliError::Io(_) | CliError::Csv(_) => EXIT_RESOURCE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(sublab::Error::Resource("x".into())).exit_code(), EXIT_RESOURCE);
        assert_eq!(CliError::from(sublab::Error::Invariant("x".into())).exit_code(), EXIT_INVARIANT);
        assert_eq!(CliError::from(sublab::Error::Domain("x".into())).exit_code(), EXIT_USAGE);
        let io = std::io::Error::other("disk");
        assert_eq!(CliError::from(io).exit_code(), EXIT_RESOURCE);
    }
}
