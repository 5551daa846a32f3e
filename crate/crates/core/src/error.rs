use thiserror::Error;

/// Errors raised by model construction, propagation and the experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(
        "norm overflow: growth exponent {exponent:.3e} exceeds the single-shot limit {limit}; \
         use a shorter time or stepped evaluation with per-step renormalization"
    )]
    Overflow { exponent: f64, limit: f64 },

    #[error("degenerate dominant growth rate ({first:.6e} vs {second:.6e}); perturb the field strength")]
    Degenerate { first: f64, second: f64 },

    #[error("eigen-decomposition residual {residual:.3e} exceeds bound {bound:.3e}")]
    EigenResidual { residual: f64, bound: f64 },

    #[error("singular matrix encountered in {0}")]
    Singular(&'static str),

    #[error("system of {n_spins} spins exceeds the dense size limit of {limit}")]
    SizeLimit { n_spins: usize, limit: usize },

    #[error("at t = {time:.6e}: {source}")]
    AtTime {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("experiment failed: {0}")]
    Experiment(String),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument { field, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
