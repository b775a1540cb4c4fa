use polaron_core::Error;
use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Convergence(String),
    Io(String),
    /// A numerical self-check (oracle-check) did not pass.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Check(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
            CliError::Check(_) => "check",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Convergence(m) | CliError::Io(m) | CliError::Check(m) => m,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.message(), "exit_code": self.exit_code() }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } => CliError::Convergence(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
