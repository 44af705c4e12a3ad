use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid size must be a power of two >= 4, got {0}")]
    BadResolution(usize),

    #[error("malformed snapshot: {0}")]
    BadSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
