use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are grouped by how a caller is expected to react: domain and
/// hypothesis errors mean the inputs are outside what the routine supports,
/// while the numerical variants mean the inputs were valid but the requested
/// accuracy could not be delivered.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge within {terms} terms (last |term| = {last_term:e})")]
    Convergence { terms: usize, last_term: f64 },

    #[error("singular evaluation: {0}")]
    Singularity(String),

    #[error("implicit step is singular (|1 - rho*w0| = {denominator:e}); reduce dt")]
    StepSize { denominator: f64 },

    #[error("inversion contour failure: {0}")]
    Contour(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("oscillating tail: {0}")]
    Oscillation(String),

    #[error("mode truncation suspect: {0}")]
    Truncation(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("at t = {t}: {source}")]
    AtTime { t: f64, source: Box<Error> },

    #[error("mode {mode}: {source}")]
    AtMode { mode: usize, source: Box<Error> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn at_time(self, t: f64) -> Self {
        Error::AtTime { t, source: Box::new(self) }
    }

    pub fn at_mode(self, mode: usize) -> Self {
        Error::AtMode { mode, source: Box::new(self) }
    }

    /// The innermost error, with time/mode tags stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } | Error::AtMode { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by the inputs violating a theorem's hypotheses.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self.root(), Error::Hypothesis(_))
    }

    /// True for truncation failures of a series (as opposed to bad inputs).
    pub fn is_convergence(&self) -> bool {
        matches!(self.root(), Error::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
