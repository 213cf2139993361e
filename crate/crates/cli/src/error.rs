//! Exit-code discipline: 0 success, 2 config/schema, 3 I/O, 4
//! data/dimension, 5 numeric failure.

use midec_core::CoreError;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { code: 2, message }
    }

    pub fn io(message: String) -> Self {
        CliError { code: 3, message }
    }

    pub fn data(message: String) -> Self {
        CliError { code: 4, message }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::Io { .. } => 3,
            CoreError::Numeric(_) => 5,
            _ => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}
