use thiserror::Error;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Witness of a unifilarity violation: in `state`, `symbol` leads to more
/// than one successor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnifilarWitness {
    pub state: usize,
    pub symbol: usize,
    pub successors: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {state} is not stochastic (1 - sum = {deficit:e})")]
    NonStochasticRow { state: usize, deficit: f64 },

    #[error("negative entry {value} in T^({symbol})[{from}][{to}]")]
    NegativeEntry {
        symbol: usize,
        from: usize,
        to: usize,
        value: f64,
    },

    #[error("transition structure is reducible; strongly connected components: {components:?}")]
    Reducible { components: Vec<Vec<String>> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("stationary distribution did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("machine is not unifilar: state {} under symbol {} has successors {:?}", .0.state, .0.symbol, .0.successors)]
    NotUnifilar(UnifilarWitness),

    #[error("symbol {symbol} has zero probability from the current mixed state")]
    ZeroProbabilitySymbol { symbol: usize },

    #[error("word is forbidden: symbol at position {position} has zero probability")]
    ZeroProbabilityWord { position: usize },

    #[error("block length {l_max} needs {cells} counters, over the budget of {budget}")]
    LMaxTooLarge {
        l_max: usize,
        cells: u128,
        budget: u128,
    },

    #[error("empty Lyapunov spectrum")]
    EmptySpectrum,

    #[error("point cloud is degenerate: {points} point(s)")]
    DegenerateCloud { points: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("machine file: {0}")]
    MachineFile(String),

    #[error("machine file JSON (line {line}, column {column}): {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
