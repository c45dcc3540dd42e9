use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("enumeration limit exceeded: n = {n} > {limit}; use the sweep or trap bounds instead")]
    EnumerationLimit { n: usize, limit: usize },
    #[error("size limit exceeded: n = {n} > {limit} for {what}")]
    SizeLimit {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("invalid model: expected model {expected}, got model {got}")]
    InvalidModel { expected: u8, got: u8 },
    #[error("too few points: need at least {need}, got {got}")]
    TooSmall { need: usize, got: usize },
    #[error("disconnected state space: {count} components with sizes {sizes:?}")]
    Disconnected { count: usize, sizes: Vec<usize> },
    #[error("eigensolver did not converge: {0}")]
    NotConverged(String),
    #[error("spectral gap {estimate:e} is below the resolvable scale {floor:e}")]
    GapUnresolved { estimate: f64, floor: f64 },
    #[error("profile does not cover [{lo}, {hi}]")]
    Coverage { lo: f64, hi: f64 },
    #[error("empty environment: {0}")]
    EmptyEnvironment(String),
    #[error("scale error: {0}")]
    Scale(String),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Shorthand used by parameter validation throughout the crate.
pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
