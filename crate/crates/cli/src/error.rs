use std::fmt;

/// Failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Invalid arguments or configuration; exit code 2.
    Input(String),
    /// A computation failed; exit code 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<sepsol::Error> for CliError {
    fn from(e: sepsol::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

/// Tags a library error raised while validating input.
pub fn input(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}
