use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (‖M − M†‖_max = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix is not unitary (‖U†U − 1‖_max = {0:e})")]
    NotUnitary(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("unknown system label `{0}`")]
    UnknownSystem(String),

    #[error("word parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("scenario is not admissible: {0}")]
    NotAdmissible(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
