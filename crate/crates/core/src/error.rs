//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error("kinematic cycle at {0}")]
    KinematicCycle(String),

    #[error("missing joint in state: {0}")]
    MissingJoint(String),

    #[error("object not visible")]
    ObjectNotVisible,

    #[error("zero moment arm")]
    ZeroMomentArm,

    #[error("no labels")]
    NoLabels,

    #[error("missing attribute: {0}")]
    MissingAttribute(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("training diverged at step {step} ({term} is not finite)")]
    NonFiniteLoss { step: usize, term: &'static str },

    #[error("bad file format: {0}")]
    BadFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
