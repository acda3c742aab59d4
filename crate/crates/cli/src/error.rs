use thiserror::Error;

/// Failures of a CLI run, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Library errors raised while evaluating a valid config.
    pub fn from_core(e: cogsec::Error) -> Self {
        use cogsec::Error as E;
        match e {
            E::NotDecodable { .. } => CliError::Infeasible(format!(
                "{e} (the listening phase needs a T1-T2 link stronger than the T1-U1 link)"
            )),
            E::Infeasible(_) => CliError::Infeasible(e.to_string()),
            E::Io(_) => CliError::Io(e.to_string()),
            E::Domain(_) | E::Invalid(_) | E::Pmf(_) | E::Precondition(_) | E::Usage(_) => CliError::Config(e.to_string()),
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
