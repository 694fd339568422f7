use thiserror::Error;

/// Failure classes shared by every module.
///
/// The CLI maps these onto exit codes: input-like errors exit with 2,
/// verification/invariant failures with 3 and resource caps with 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("invariant breached: {0}")]
    Invariant(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("solver did not converge after {iterations} rounds (bracket [{lower}, {upper}])")]
    NotConverged {
        lower: f64,
        upper: f64,
        iterations: usize,
    },
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Embedding(_)
            | Error::Label(_)
            | Error::Precondition(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::Construction(_) | Error::Invariant(_) | Error::Verification(_) => 3,
            Error::NotConverged { .. } | Error::Resource(_) => 4,
        }
    }
}
