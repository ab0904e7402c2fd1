use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    Lattice(String),

    #[error("invalid region: {0}")]
    Region(String),

    #[error("configuration does not match lattice: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("curve never crosses 1/2")]
    NoCrossing,

    #[error("vertex {0} is not present in the graph")]
    MissingVertex(usize),

    #[error("rewrite precondition violated: {0}")]
    Precondition(String),

    #[error("dense state needs {needed} qubits, budget is {budget}")]
    QubitBudget { needed: usize, budget: usize },

    #[error("configuration has zero probability")]
    ZeroProbability,

    #[error("measurement outcome is deterministically -1")]
    DeterministicMinusOne,

    #[error("graph is not connected")]
    Disconnected,

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
