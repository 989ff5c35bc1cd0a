use crate::sysfile::SysFileError;

/// Failure of a CLI run, tagged with a machine-readable category.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError { category, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::new("invalid-argument", message)
    }

    pub fn exit_code(&self) -> u8 {
        exit_code(self.category)
    }
}

/// Exit status per category; 1 is left for unexpected failures.
pub fn exit_code(category: &str) -> u8 {
    match category {
        "invalid-argument" => 2,
        "infeasible" => 3,
        "not-stabilizable" => 4,
        "io" => 5,
        "numerical" => 6,
        _ => 1,
    }
}

impl From<stabcert_core::Error> for CliError {
    fn from(e: stabcert_core::Error) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

impl From<SysFileError> for CliError {
    fn from(e: SysFileError) -> Self {
        CliError::new(e.category(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}
