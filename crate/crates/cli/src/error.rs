use std::fmt;

use sit_core::SitError;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Malformed flags, config or sweep specification.
    Usage(String),
    Io(String),
    Model(SitError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Model(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Model(_) => EXIT_NUMERICAL,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Model(e) => e.kind(),
        }
    }

    /// One-line JSON object for standard error.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<SitError> for CliError {
    fn from(e: SitError) -> Self {
        CliError::Model(e)
    }
}
