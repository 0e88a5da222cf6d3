use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed matrix text. `line` and `column` are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// An exact or exhaustive operation was asked for a dimension it refuses.
    #[error("{operation} supports n <= {max}, got n = {n}")]
    SizeGuard {
        operation: &'static str,
        n: usize,
        max: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("weights sum to zero")]
    ZeroWeights,
    #[error("transition matrix is not reversible (max detailed-balance defect {defect:e})")]
    NotReversible { defect: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn guard(operation: &'static str, n: usize, max: usize) -> Result<()> {
        if n > max {
            Err(Error::SizeGuard { operation, n, max })
        } else {
            Ok(())
        }
    }

    /// True for guard violations, the class of errors the CLI maps to exit code 3.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::SizeGuard { .. })
    }
}
