use thiserror::Error;

#[derive(Debug, Error)]
pub enum QcorrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    Numerical { sweeps: usize, residual: f64 },
    #[error("function undefined on spectrum: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("invalid state: {0}")]
    StateValidation(String),
    #[error("malformed state file: {0}")]
    Format(String),
    #[error("basis is not orthonormal (Gram deviation {0:e})")]
    Basis(f64),
    #[error("state is not pure (purity {0})")]
    Purity(f64),
    #[error("no closed form for {family} on partition {partition}")]
    CatalogMiss { family: String, partition: String },
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = QcorrError> = std::result::Result<T, E>;
