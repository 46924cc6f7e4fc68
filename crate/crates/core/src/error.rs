use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite state at neuron {neuron} (t = {time} s)")]
    NonFinite { neuron: usize, time: f64 },

    #[error("input covers {covered} s but the run needs {required} s")]
    InputTooShort { covered: f64, required: f64 },

    #[error("regression matrix is rank deficient; use a ridge coefficient alpha > 0")]
    RankDeficient,

    #[error("spectral radius of the raw recurrent draw is 0; increase the density")]
    ZeroSpectralRadius,

    #[error("reservoir produced no spikes: {0}")]
    Silent(String),

    #[error("not enough samples: {0}")]
    InsufficientData(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
