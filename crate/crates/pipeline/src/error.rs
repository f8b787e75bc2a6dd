use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unknown token '{unit}' at position {position}")]
    UnknownToken { unit: String, position: usize },

    #[error("token id {id} is outside the vocabulary (size {vocab_size})")]
    InvalidTokenId { id: u8, vocab_size: usize },

    #[error("vocabulary file holds {got} tokens, expected {expected}")]
    VocabularySize { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("sample line {line}: {reason}")]
    SampleParse { line: usize, reason: String },

    #[error("evaluation over an empty record list")]
    EmptyRecords,

    #[error("regression needs at least 3 included points, got {got}")]
    InsufficientData { got: usize },

    #[error("regression distances have zero variance")]
    DegenerateRegression,

    #[error("predictions hold {predictions} lines but the test set holds {samples}")]
    RecordCountMismatch { predictions: usize, samples: usize },

    #[error(transparent)]
    Core(#[from] automata_core::CoreError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
