use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("region too large for exhaustive enumeration: {what} = {size} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("incompatible regions: {0}")]
    IncompatibleRegions(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("empty sample stream")]
    EmptyStream,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn too_large(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(Error::TooLarge { what, size, limit })
    } else {
        Ok(())
    }
}
