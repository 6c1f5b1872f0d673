use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChmmError {
    #[error("alphabet contains duplicate symbol {0:?}")]
    DuplicateSymbol(String),

    #[error("symbol {0:?} not in alphabet")]
    UnknownSymbol(String),

    #[error("capacity {capacity} too small: need at least {needed} states ({symbols} symbols x {min_per_symbol} min clones)")]
    CapacityTooSmall {
        capacity: usize,
        needed: usize,
        symbols: usize,
        min_per_symbol: usize,
    },

    #[error("symbol {0} does not appear in the corpus")]
    SymbolMissingFromCorpus(usize),

    #[error("row for symbol {0} has no permitted successor block")]
    EmptySuccessorRow(usize),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("corrupt model header: {0}")]
    CorruptHeader(String),

    #[error("model shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("model contains non-finite value at offset {0}")]
    NonFinite(usize),

    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("sequence {index} has zero probability under the model")]
    ImpossibleSequence { index: usize },

    #[error("empty validation set")]
    EmptyValidation,

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sufficient statistics are all zero")]
    ZeroStats,

    #[error("malformed word boundaries: {0}")]
    MalformedBoundaries(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ChmmError>;
