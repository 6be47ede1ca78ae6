use thiserror::Error;

/// Crate-wide error type.
///
/// Variants are grouped by how the CLI maps them to exit codes: usage
/// problems exit 1, data problems exit 2, degenerate metrics exit 3 under
/// `--strict` (and are embedded as markers otherwise).
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error("{metric} undefined: {reason}")]
    Degenerate { metric: String, reason: String },

    #[error("evaluation budget exhausted")]
    BudgetExhausted,

    #[error(
        "no radius up to {max_radius} reaches average degree {target} \
         (achieved {achieved:.3} at radius {max_radius})"
    )]
    TargetUnreachable {
        target: f64,
        max_radius: u32,
        achieved: f64,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn degenerate(metric: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            metric: metric.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
