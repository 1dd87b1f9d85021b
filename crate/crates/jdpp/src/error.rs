use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("site weight {index} must be positive, got {value}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("part label {label} at site {index} is not 1 or 2")]
    InvalidPartLabel { index: usize, label: u8 },
    #[error("site {site} out of range for d = {d}")]
    SiteOutOfRange { site: usize, d: usize },
    #[error("site {0} repeated")]
    RepeatedSite(usize),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("{what}: requested {requested}, cap is {cap}")]
    Infeasible { what: &'static str, requested: usize, cap: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("odd length {0}")]
    OddLength(usize),
    #[error("negative probability {value} for subset mask {mask}")]
    NegativeProbability { mask: u64, value: f64 },
    #[error("imaginary residue {0} exceeds tolerance")]
    ImaginaryResidue(f64),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
