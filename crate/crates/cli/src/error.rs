use std::fmt;
use std::process::ExitCode;

use serde_json::json;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration or a violated estimator precondition (exit 2).
    Config { kind: &'static str, message: String },
    /// Reading or writing files (exit 3).
    Io(anyhow::Error),
}

impl CliError {
    pub fn invalid(field: &str, reason: impl fmt::Display) -> Self {
        CliError::Config {
            kind: "invalid_parameter",
            message: format!("invalid {field}: {reason}"),
        }
    }

    pub fn io(context: String, err: std::io::Error) -> Self {
        CliError::Io(anyhow::Error::new(err).context(context))
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config { .. } => ExitCode::from(2),
            CliError::Io(_) => ExitCode::from(3),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Config { kind, message } => (*kind, message.clone()),
            CliError::Io(e) => ("io", format!("{e:#}")),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl From<milstein_core::Error> for CliError {
    fn from(e: milstein_core::Error) -> Self {
        CliError::Config {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { message, .. } => f.write_str(message),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}
