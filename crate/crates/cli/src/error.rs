use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] walklab::Error),

    #[error("{0}")]
    Truncated(String),

    #[error("{0} check(s) violated")]
    Violations(usize),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 check violation, 2 usage or config error, 3 budget truncation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violations(_) => 1,
            CliError::Truncated(_) | CliError::Core(walklab::Error::BudgetExceeded { .. }) => 3,
            CliError::Config(_) | CliError::Core(_) | CliError::Io { .. } => 2,
        }
    }
}

pub fn io_context(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
