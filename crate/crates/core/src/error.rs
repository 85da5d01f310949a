use crate::solver::TraceEntry;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A dense factorization did not converge or hit a non-finite pivot.
    #[error("numerical failure in {what} after {iterations} iterations")]
    NumericalFailure { what: &'static str, iterations: usize },

    /// The iterate sequence blew up. `mode` is `None` for the vector baselines.
    #[error("solver diverged at iteration {iteration}{}", mode.map(|m| format!(" (mode {m})")).unwrap_or_default())]
    Divergence {
        mode: Option<usize>,
        iteration: usize,
        trace: Vec<TraceEntry>,
    },

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
