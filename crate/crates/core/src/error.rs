use alloc::string::String;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation produced a value that violates a structural guarantee,
    /// or an integrator did not reach its tolerance.
    #[error("numerical error: {what} (achieved {achieved:e})")]
    Numerical { what: String, achieved: f64 },

    /// A series hit its term cap before meeting the stopping rule.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Invalid parameters or inputs (grids, rules, tables).
    #[error("configuration error: {0}")]
    Config(String),

    /// A size limit was exceeded.
    #[error("resource limit exceeded: {what} (cap {cap})")]
    Resource { what: String, cap: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn numerical(what: impl Into<String>, achieved: f64) -> Self {
        Error::Numerical {
            what: what.into(),
            achieved,
        }
    }
}
