use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hvi_core::Error),
    #[error("{0}")]
    NotConverged(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use hvi_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                E::Capacity { .. }
                | E::InvalidParameter(_)
                | E::PenaltyTooSmall { .. }
                | E::Unsupported(_)
                | E::Usage(_) => EXIT_CONFIG,
                _ => EXIT_SOLVER,
            },
            CliError::NotConverged(_) => EXIT_SOLVER,
            CliError::Io { .. } => 1,
        }
    }
}
