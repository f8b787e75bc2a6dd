//! A small decoder-only autoregressive sequence model with hand-written
//! backpropagation, generic over the scalar type: f32 for training speed,
//! f64 for finite-difference verification.

pub mod adam;
pub mod checkpoint;
pub mod config;
pub mod error;
pub mod scalar;
pub mod train;
pub mod transformer;

pub use adam::{warmup_lr, Adam};
pub use checkpoint::{load_checkpoint, load_meta, save_checkpoint, Checkpoint, CheckpointMeta};
pub use config::{ModelConfig, TrainConfig};
pub use error::ModelError;
pub use scalar::Scalar;
pub use train::{
    prompt_for, prompt_len, score_generation, train, EpochSummary, TrainLog, TrainLogRow,
    TrainOutcome, TrainSession,
};
pub use transformer::{suffix_weights, uniform_weights, Gradients, Transformer};

/// Training-width model.
pub type Transformer32 = Transformer<f32>;
/// Verification-width model.
pub type Transformer64 = Transformer<f64>;
