use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),

    #[error("sequence of {len} tokens exceeds max_seq_len {max}")]
    SequenceOverflow { len: usize, max: usize },

    #[error("training loss became non-finite at global step {step}; last-good checkpoint retained")]
    Diverged { step: u64 },

    #[error("checkpoint format error: {0}")]
    CheckpointFormat(String),

    #[error("checkpoint stores {stored} parameters but the model expects {expected}")]
    CheckpointShape { stored: String, expected: String },

    #[error(transparent)]
    Pipeline(#[from] automata_pipeline::PipelineError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
