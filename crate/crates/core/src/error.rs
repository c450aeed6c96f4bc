use thiserror::Error;

/// Errors raised anywhere in the crate. Agent, row and column numbers in
/// error values are 1-based labels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("a network needs at least 2 agents, got {0}")]
    TooFewAgents(usize),

    #[error("network is not strongly connected: agent {to} is unreachable from agent {from}")]
    NotStronglyConnected { from: usize, to: usize },

    #[error("no self-loop: {0}")]
    NoSelfLoop(String),

    #[error("combination pattern violation: {0}")]
    PatternViolation(String),

    #[error("column {column} of the combination matrix sums to {sum} (expected 1)")]
    NotStochastic { column: usize, sum: f64 },

    #[error("negative combination weight {value} at ({row}, {column})")]
    NegativeWeight { row: usize, column: usize, value: f64 },

    #[error("power iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("residual block of agent {agent} has spectral radius {radius} (must be < 1)")]
    UnstableResidualBlock { agent: usize, radius: f64 },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("correlation matrix is not positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("degenerate belief: {0}")]
    DegenerateBelief(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("influence matrix entry ({row}, {column}) = {value} is not strictly positive")]
    NotPositive { row: usize, column: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag, used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::TooFewAgents(_) => "too_few_agents",
            Error::NotStronglyConnected { .. } => "not_strongly_connected",
            Error::NoSelfLoop(_) => "no_self_loop",
            Error::PatternViolation(_) => "pattern_violation",
            Error::NotStochastic { .. } => "not_stochastic",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::NoConvergence { .. } => "no_convergence",
            Error::UnstableResidualBlock { .. } => "unstable_residual_block",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotPositiveSemidefinite(_) => "not_positive_semidefinite",
            Error::InvalidBelief(_) => "invalid_belief",
            Error::DegenerateBelief(_) => "degenerate_belief",
            Error::SingularSystem(_) => "singular_system",
            Error::NotPositive { .. } => "not_positive",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
