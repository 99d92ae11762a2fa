use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lattice too large: {n_agents} agents exceeds the limit of {limit}")]
    TooManyAgents { n_agents: usize, limit: usize },
    #[error("table length {len} does not match 2^{n_agents}")]
    TableSize { n_agents: usize, len: usize },
    #[error("set function must vanish on the empty coalition")]
    NonZeroEmpty,
    #[error("coalition mask {mask:#x} has members outside 0..{n_agents}")]
    MaskOutOfRange { mask: u32, n_agents: usize },
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("probabilities sum to {sum}, expected 1")]
    Unnormalized { sum: f64 },
    #[error("probability table has {probs} entries but energy table has {energies}")]
    LengthMismatch { probs: usize, energies: usize },
    #[error("marginal q[{index}] = {value} lies outside (0, 1)")]
    MarginalOutOfRange { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadratic fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("singular design matrix: the points span fewer than 3 distinct abscissae")]
    SingularFit,
    #[error("game has an empty utility table")]
    EmptyGame,
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
