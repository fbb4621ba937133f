use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("state overflow at step {step} (t = {time}, stream {stream_id})")]
    Overflow {
        step: usize,
        time: f64,
        stream_id: u64,
    },

    #[error("all {0} paths overflowed")]
    AllOverflow(usize),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
