use synergy_core::Error as CoreError;
use synergy_sim::SimError;

#[derive(Debug, thiserror::Error)]
/// Usage errors never reach this type: clap exits with 2 on its own.
pub enum CliError {
    #[error("{0}")]
    MissingData(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingData(_) => 3,
            CliError::Config(_) => 4,
            CliError::Numerical(_) => 5,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }
}

fn core_category(e: &CoreError) -> bool {
    matches!(e, CoreError::SingularFit | CoreError::NonFinite(_) | CoreError::Unnormalized { .. } | CoreError::TooFewPoints(_))
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        let msg = e.to_string();
        match e {
            SimError::DatasetMissing { .. } => CliError::MissingData(msg),
            SimError::SingularSystem => CliError::Numerical(msg),
            SimError::Core(ref c) if core_category(c) => CliError::Numerical(msg),
            SimError::Core(_) | SimError::InvalidArgument(_) => CliError::Config(msg),
            SimError::Io(e) => CliError::Io(e),
            _ => CliError::Other(msg),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::from(SimError::Core(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
