use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("capacity error: dimension {dim} exceeds cap {cap}")]
    Capacity { dim: usize, cap: usize },
    #[error("optimization aborted: {0}")]
    Aborted(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::Error::Input(alloc::format!($($arg)*)) };
}
pub(crate) use input_err;
