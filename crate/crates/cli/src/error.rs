use std::fmt;

use robust_psd::Error;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Domain(_) => 4,
        }
    }

    /// `--flag`-prefixed usage error.
    pub fn flag(flag: &str, msg: impl fmt::Display) -> Self {
        CliError::Usage(format!("{flag}: {msg}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) => CliError::Input(e.to_string()),
            Error::Domain { .. } | Error::Quadrature { .. } => CliError::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
