use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A problem size outside the range a brute-force routine accepts.
    #[error("size {n} outside supported range {min}..={max} for {what}")]
    Size { what: &'static str, n: usize, min: usize, max: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// A facet-family generator was called with indices violating its side conditions.
    #[error("family constraint violated: {0}")]
    FamilyConstraint(String),

    #[error("decode failed: {0}")]
    Decode(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}, token {token}: {message}")]
    Parse { line: usize, token: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear program: {0}")]
    Lp(String),

    /// A verification step found a contradiction with an expected identity.
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(what: &'static str, n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        return Err(Error::Size { what, n, min, max });
    }
    Ok(())
}
