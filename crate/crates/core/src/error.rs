use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a formula (e.g. beyond the edge of
    /// the equispaced-log potential or outside a tabulated beam).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (max gradient {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("degenerate chain: {0}")]
    DegenerateChain(String),

    #[error("unstable chain: eigenvalue {eigenvalue:e} of mode {mode} is not positive")]
    UnstableChain { mode: usize, eigenvalue: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    /// Fit failure. `best` holds the best parameters found so far, if any.
    #[error("fit failed: {reason}")]
    Fit { reason: String, best: Option<Vec<f64>> },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn fit(reason: impl Into<String>) -> Self {
        Error::Fit { reason: reason.into(), best: None }
    }

    /// True for errors produced by a numerical procedure rather than by bad
    /// input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver { .. } | Error::DegenerateChain(_) | Error::UnstableChain { .. } | Error::Fit { .. }
        )
    }
}
