use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("invalid grammar: {0}")]
    InvalidGrammar(String),
    #[error("alternative index {index} out of range for rule with {len} alternatives")]
    InvalidAlternative { index: usize, len: usize },
    #[error("degenerate group: average sub-sequence length is zero")]
    DegenerateGroup,
    #[error("grammar cannot produce sequence within max_len {0}")]
    SampleBudgetExhausted(usize),
    #[error("cannot merge an empty list of grammars")]
    EmptyMerge,
    #[error("no key actions: no action occurs in every sequence")]
    NoKeyActions,
    #[error("sequence is missing key action `{0}`")]
    MissingKeyAction(String),
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("invalid probability matrix: {0}")]
    InvalidMatrix(String),
    #[error("grammar rejects input distribution support")]
    NoParse,
    #[error("more segments than frames ({segments} > {frames})")]
    TooManySegments { segments: usize, frames: usize },
    #[error("label streams differ in length ({pred} vs {gt} frames)")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
