//! File formats, reports and the `antitone` command line on top of
//! [`antitone_core`].

pub mod cli;
pub mod format;
pub mod report;
pub mod trace;

/// Process exit code for malformed or invalid input.
pub const EXIT_INVALID: u8 = 2;
/// Process exit code for numerical failures.
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: {msg}")]
    Field { field: &'static str, msg: String },
    #[error("writing trace: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] antitone_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use antitone_core::Error as E;
        match self {
            CliError::Core(
                E::BudgetExhausted { .. }
                | E::LeftDomain { .. }
                | E::Cycled { .. }
                | E::Singular
                | E::IllConditioned(_)
                | E::MonotonicityViolation { .. },
            ) => EXIT_NUMERICAL,
            _ => EXIT_INVALID,
        }
    }

    /// Extra guidance printed after the message.
    pub fn hint(&self) -> Option<&'static str> {
        match self {
            CliError::Core(antitone_core::Error::NegativeCoupling { .. }) => {
                Some("M must be entrywise nonnegative; isotone or mixed couplings are not antitone systems")
            }
            CliError::Core(antitone_core::Error::NotAntitone { .. }) => Some("run `antitone ingest` to see the classification"),
            _ => None,
        }
    }
}
