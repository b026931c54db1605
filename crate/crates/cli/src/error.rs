use std::fmt;

/// Failure classes, mapped to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl From<qphase::Error> for CliError {
    fn from(e: qphase::Error) -> Self {
        use qphase::Error::*;
        match e {
            InvalidSpec(_) | InvalidInput(_) | NotApplicable(_) | DomainViolation { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}
