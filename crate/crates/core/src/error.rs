use thiserror::Error;

pub type Result<T> = std::result::Result<T, EsdError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EsdError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A ratio whose denominator vanished, e.g. NESR when neither branch is
    /// ever accepted.
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error(
        "transmission rate {t:e} is below {min:e}; direct sampling cannot resolve the \
         non-empty branch, use conditional mode"
    )]
    RareEventRegime { t: f64, min: f64 },

    /// No design point survives the query constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),
}

impl EsdError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        EsdError::InvalidParameter(msg.into())
    }
}
