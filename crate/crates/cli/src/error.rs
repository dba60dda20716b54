use std::fmt;

use kautz_core::Error;

/// Process exit codes. The numeric values are part of the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    IdentityFailure = 1,
    Usage = 2,
    Resource = 3,
    MissingCalibration = 4,
    CalibrationFailure = 5,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn new(status: ExitStatus, message: impl fmt::Display) -> Self {
        CliError {
            status,
            message: message.to_string(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Self::new(ExitStatus::Usage, message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Domain(_) | Error::NotApplicable(_) | Error::Parse(_) | Error::Json(_) => {
                ExitStatus::Usage
            }
            Error::MasksUndefined(_) => ExitStatus::Usage,
            Error::Resource { .. } | Error::Overflow | Error::SearchBudget(_) => {
                ExitStatus::Resource
            }
            Error::NegativeResult(_) | Error::Consistency { .. } => ExitStatus::IdentityFailure,
            Error::NoMatch(_) | Error::Ambiguous(_) | Error::NoFit(_) => {
                ExitStatus::CalibrationFailure
            }
        };
        let message = match e {
            Error::Resource {
                what,
                requested,
                cap,
            } => {
                let env = if what == "edge" {
                    "raise it with KAUTZ_EDGE_CAP or "
                } else {
                    ""
                };
                format!(
                    "refusing to enumerate {requested} {what}s: the {what} cap is {cap}; \
                     {env}lift all caps with --override-cap"
                )
            }
            Error::MasksUndefined(q) => {
                format!("no masks are known for q = {q}; supply a masks file with --masks")
            }
            other => other.to_string(),
        };
        CliError { status, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("malformed JSON: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::usage(format!("malformed CSV: {e}"))
    }
}
