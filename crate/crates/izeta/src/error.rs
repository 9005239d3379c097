use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes across the crate. Numerical routines report the offending
/// index or value so callers can diagnose without re-running.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("eigensolver exceeded {sweeps} shift sweeps at index {index}")]
    NoConvergence { index: usize, sweeps: usize },

    #[error("matrix singular to machine tolerance at pivot {pivot_index}")]
    SingularMatrix { pivot_index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zeta pole or zero at u = {0}")]
    ZetaSingular(ComplexDisplay),

    #[error("singular log-determinant: shifted eigenvalue {value:e} at index {index}")]
    SingularLogDet { index: usize, value: f64 },

    #[error("log zeta undefined on the real branch: {negative_count} nonpositive shifted eigenvalues")]
    NegativeBranch { negative_count: usize },

    #[error("walk-count accumulator overflow at length {length}")]
    WalkCountOverflow { length: usize },

    #[error("dense edge operator capped at {cap} directed edges, graph has {actual}")]
    EdgeOperatorTooLarge { cap: usize, actual: usize },

    #[error("replica {replica}: {source}")]
    Replica {
        replica: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Complex number wrapper so error messages print `a+bi` without pulling
/// formatting logic into every error site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexDisplay(pub f64, pub f64);

impl fmt::Display for ComplexDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 >= 0.0 {
            write!(f, "{}+{}i", self.0, self.1)
        } else {
            write!(f, "{}{}i", self.0, self.1)
        }
    }
}
