use std::fmt;

use kappa_core::KappaError;

/// Exit 2 for bad invocations, 1 for failures during computation.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub usage: bool,
}

impl CliError {
    pub fn usage(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            usage: true,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.usage {
            2
        } else {
            1
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep it on one line whatever the source message contains
        let msg = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {}", self.code, msg)
    }
}

impl From<KappaError> for CliError {
    fn from(e: KappaError) -> Self {
        Self {
            code: e.code(),
            message: e.to_string(),
            usage: false,
        }
    }
}

/// Argument validation failures surfaced by core are still usage errors.
pub trait UsageContext<T> {
    fn into_usage(self) -> Result<T, CliError>;
}

impl<T> UsageContext<T> for Result<T, KappaError> {
    fn into_usage(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::usage(e.code(), e.to_string()))
    }
}
