use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Architecture hyperparameters. Defaults follow the full-scale setup:
/// 22 tokens, 555-token context, width 256, 6 layers, 4 heads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub max_seq_len: usize,
    pub dim: usize,
    pub depth: usize,
    pub heads: usize,
    /// Positional scheme recorded for the checkpoint: a learned per-head
    /// bias over relative distance added to attention logits.
    pub positional_encoding: String,
    pub eos_id: u8,
    pub mask_id: u8,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            vocab_size: automata_pipeline::VOCAB_SIZE,
            max_seq_len: 555,
            dim: 256,
            depth: 6,
            heads: 4,
            positional_encoding: "learned-relative-bias".to_string(),
            eos_id: automata_pipeline::EOS_ID,
            mask_id: automata_pipeline::MASK_ID,
        }
    }
}

impl ModelConfig {
    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.dim == 0 || self.depth == 0 || self.heads == 0 || self.vocab_size == 0 {
            return Err(ModelError::Config(
                "dim, depth, heads, and vocab_size must be positive".into(),
            ));
        }
        if self.dim % self.heads != 0 {
            return Err(ModelError::Config(format!(
                "embedding width {} is not divisible by head count {}",
                self.dim, self.heads
            )));
        }
        if usize::from(self.eos_id) >= self.vocab_size || usize::from(self.mask_id) >= self.vocab_size {
            return Err(ModelError::Config(
                "eos/mask token ids must lie inside the vocabulary".into(),
            ));
        }
        Ok(())
    }
}

/// Optimization hyperparameters. Defaults: Adam at 1e-4 with a 1000-step
/// linear warm-up, batches of 50, input-mask probability 0.15.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub grad_accumulation: usize,
    pub mask_prob: f64,
    pub warmup_steps: usize,
    pub epochs: usize,
    pub seed: u64,
    /// When set, the cross-entropy loss covers only the generation suffix
    /// instead of every sequence position (ablation flag).
    pub loss_suffix_only: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 50,
            grad_accumulation: 1,
            mask_prob: 0.15,
            warmup_steps: 1000,
            epochs: 50,
            seed: 0,
            loss_suffix_only: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.batch_size == 0 || self.grad_accumulation == 0 {
            return Err(ModelError::Config(
                "batch_size and grad_accumulation must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.mask_prob) {
            return Err(ModelError::Config(format!(
                "mask_prob {} is outside [0, 1]",
                self.mask_prob
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(ModelError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}
