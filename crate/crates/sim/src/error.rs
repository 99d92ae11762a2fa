use thiserror::Error;

/// Public record holding the roundabout trajectories.
pub const DATASET_RECORD: &str = "https://zenodo.org/records/15077435";

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] synergy_core::Error),
    #[error("missing column `{0}` in track CSV header")]
    MissingColumn(String),
    #[error("line {line}: {msg}")]
    Row { line: u64, msg: String },
    #[error("no usable tracks: {0}")]
    EmptyData(String),
    #[error("dataset not found at {path}; download D1_AM2_F1.csv from {DATASET_RECORD}")]
    DatasetMissing { path: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("normal equations are singular; use a ridge penalty lambda > 0")]
    SingularSystem,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
