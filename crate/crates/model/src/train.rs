//! Training session: batched next-token optimization with input masking,
//! per-batch validation loss, per-epoch test inference, append-only logging,
//! and epoch-boundary checkpointing.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use automata_pipeline::{
    extract_binary, format_sample, score_forward, score_inverse, Dataset, Sample, Task, Vocabulary,
};

use crate::adam::{warmup_lr, Adam};
use crate::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use crate::config::{ModelConfig, TrainConfig};
use crate::error::ModelError;
use crate::scalar::{sc, Scalar};
use crate::transformer::{suffix_weights, uniform_weights, Gradients, Transformer};

/// Fixed fan-out for batch-parallel gradient work. Chunks are split by index
/// and combined in order, so results do not depend on thread scheduling.
const GRAD_CHUNKS: usize = 8;

/// Prompt length for a task on 16x16 grids: everything up to and including
/// the token that opens the generated field.
pub fn prompt_len(task: Task) -> usize {
    match task {
        Task::Forward => 297, // [BOS] [R] <36> [BIC] <256> [EIC] [BGS2]
        Task::Inverse => 518, // [BOS] [BIC] <256> [EIC] [BGS2] <256> [EGS2] [R]
    }
}

/// The tokenized prompt for one sample: the full instruction encoding cut
/// after the field-opening token, a strict prefix of the sample's encoding.
pub fn prompt_for(
    sample: &Sample,
    task: Task,
    vocab: &Vocabulary,
) -> Result<Vec<u8>, ModelError> {
    let line = format_sample(sample, task);
    let full = vocab.encode(&line)?;
    Ok(full[..prompt_len(task)].to_vec())
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainLogRow {
    pub epoch: u64,
    pub global_step: u64,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub elapsed_seconds: f64,
}

/// In-memory log mirrored to an append-only CSV file.
pub struct TrainLog {
    pub rows: Vec<TrainLogRow>,
    path: PathBuf,
}

impl TrainLog {
    pub fn create(path: &Path) -> Result<Self, ModelError> {
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "epoch,global_step,train_loss,val_loss,test_accuracy,elapsed_seconds"
        )?;
        Ok(Self {
            rows: Vec::new(),
            path: path.to_path_buf(),
        })
    }

    pub fn open_append(path: &Path) -> Result<Self, ModelError> {
        if !path.exists() {
            return Self::create(path);
        }
        Ok(Self {
            rows: Vec::new(),
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append_rows(&mut self, rows: Vec<TrainLogRow>) -> Result<(), ModelError> {
        let mut file = std::fs::OpenOptions::new().append(true).open(&self.path)?;
        let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
        for row in &rows {
            writeln!(
                file,
                "{},{},{},{},{},{:.3}",
                row.epoch,
                row.global_step,
                row.train_loss,
                fmt_opt(row.val_loss),
                fmt_opt(row.test_accuracy),
                row.elapsed_seconds
            )?;
        }
        self.rows.extend(rows);
        Ok(())
    }
}

/// Summary of one completed epoch.
#[derive(Clone, Debug)]
pub struct EpochSummary {
    pub epoch: u64,
    pub mean_train_loss: f64,
    pub test_accuracy: Option<f64>,
}

struct TestFixture {
    prompt: Vec<u8>,
    sample: Sample,
}

/// Owns the model, the optimizer, the tokenized splits, and the log; drives
/// training one epoch at a time so callers can evaluate and stop early.
pub struct TrainSession<F: Scalar> {
    model: Transformer<F>,
    optimizer: Adam<F>,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    task: Task,
    train_seqs: Vec<Vec<u8>>,
    val_seqs: Vec<Vec<u8>>,
    test_fixtures: Vec<TestFixture>,
    weights: Vec<F>,
    global_step: u64,
    epoch: u64,
    started: Instant,
    out_dir: PathBuf,
    model_name: String,
    log: TrainLog,
}

impl<F: Scalar> TrainSession<F> {
    /// Builds a fresh session: encodes the dataset splits, initializes the
    /// model from the seed, and writes the initial checkpoint so a last-good
    /// state always exists.
    pub fn new(
        dataset: &Dataset,
        vocab: &Vocabulary,
        model_cfg: ModelConfig,
        train_cfg: TrainConfig,
        out_dir: &Path,
        model_name: &str,
    ) -> Result<Self, ModelError> {
        model_cfg.validate()?;
        train_cfg.validate()?;
        std::fs::create_dir_all(out_dir)?;

        let mut rng = ChaCha12Rng::seed_from_u64(train_cfg.seed);
        let model = Transformer::init(model_cfg.clone(), &mut rng)?;
        let optimizer = Adam::new(&model_cfg);
        let log = TrainLog::create(&out_dir.join("train_log.csv"))?;

        let mut session = Self {
            model,
            optimizer,
            model_cfg,
            train_cfg,
            task: dataset.task,
            train_seqs: Vec::new(),
            val_seqs: Vec::new(),
            test_fixtures: Vec::new(),
            weights: Vec::new(),
            global_step: 0,
            epoch: 0,
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            model_name: model_name.to_string(),
            log,
        };
        session.ingest(dataset, vocab)?;
        session.save(vocab)?;
        Ok(session)
    }

    /// Continues a saved session on the same dataset; the global step and
    /// epoch counters pick up where the checkpoint left them.
    pub fn resume(
        checkpoint_dir: &Path,
        dataset: &Dataset,
        vocab: &Vocabulary,
        out_dir: &Path,
    ) -> Result<Self, ModelError> {
        let ckpt = load_checkpoint::<F>(checkpoint_dir)?;
        std::fs::create_dir_all(out_dir)?;
        let log = TrainLog::open_append(&out_dir.join(&ckpt.meta.train_log))?;
        let mut session = Self {
            model: ckpt.model,
            optimizer: ckpt.optimizer,
            model_cfg: ckpt.meta.model.clone(),
            train_cfg: ckpt.meta.train.clone(),
            task: dataset.task,
            train_seqs: Vec::new(),
            val_seqs: Vec::new(),
            test_fixtures: Vec::new(),
            weights: Vec::new(),
            global_step: ckpt.meta.global_step,
            epoch: ckpt.meta.epoch,
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            model_name: ckpt.meta.model_name.clone(),
            log,
        };
        session.ingest(dataset, vocab)?;
        Ok(session)
    }

    fn ingest(&mut self, dataset: &Dataset, vocab: &Vocabulary) -> Result<(), ModelError> {
        let (train, val, test) = dataset.splits();
        let encode_all = |samples: &[Sample]| -> Result<Vec<Vec<u8>>, ModelError> {
            samples
                .iter()
                .map(|s| {
                    let ids = vocab.encode(&format_sample(s, self.task))?;
                    if ids.len() > self.model_cfg.max_seq_len {
                        return Err(ModelError::SequenceOverflow {
                            len: ids.len(),
                            max: self.model_cfg.max_seq_len,
                        });
                    }
                    Ok(ids)
                })
                .collect()
        };
        if train.is_empty() {
            return Err(ModelError::Config(
                "dataset has no training split; train on a dataset generated without --testset-shared".into(),
            ));
        }
        self.train_seqs = encode_all(train)?;
        self.val_seqs = encode_all(val)?;
        self.test_fixtures = test
            .iter()
            .map(|s| {
                Ok(TestFixture {
                    prompt: prompt_for(s, self.task, vocab)?,
                    sample: s.clone(),
                })
            })
            .collect::<Result<_, ModelError>>()?;

        let input_len = 554; // 555-token sequences shifted by one
        self.weights = if self.train_cfg.loss_suffix_only {
            suffix_weights(input_len, prompt_len(self.task) - 1)
        } else {
            uniform_weights(input_len)
        };
        Ok(())
    }

    pub fn model(&self) -> &Transformer<F> {
        &self.model
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    pub fn steps_per_epoch(&self) -> usize {
        self.train_seqs.len().div_ceil(self.train_cfg.batch_size)
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn checkpoint_dir(&self) -> PathBuf {
        self.out_dir.join("checkpoint")
    }

    /// Runs one epoch: batches in dataset order, fresh masking stream per
    /// epoch, one held-out validation batch per training batch, then
    /// task-appropriate greedy inference over the test split. The checkpoint
    /// is rewritten only after the epoch completes, so divergence keeps the
    /// previous state on disk.
    pub fn run_epoch(&mut self, vocab: &Vocabulary) -> Result<EpochSummary, ModelError> {
        let batch = self.train_cfg.batch_size;
        let epoch_index = self.epoch + 1;
        // Per-epoch derivation keeps resume-at-boundary deterministic.
        let mut mask_rng =
            ChaCha12Rng::seed_from_u64(self.train_cfg.seed ^ epoch_index.wrapping_mul(0x9E37_79B9));

        let mut rows = Vec::new();
        let mut loss_sum = 0.0;
        let mut n_batches = 0usize;

        let n_train = self.train_seqs.len();
        let mut start = 0usize;
        let mut val_cursor = 0usize;
        while start < n_train {
            let end = (start + batch).min(n_train);
            let (loss, val_loss) = self.train_step(start..end, &mut mask_rng, &mut val_cursor)?;
            loss_sum += loss;
            n_batches += 1;
            rows.push(TrainLogRow {
                epoch: epoch_index,
                global_step: self.global_step,
                train_loss: loss,
                val_loss,
                test_accuracy: None,
                elapsed_seconds: self.started.elapsed().as_secs_f64(),
            });
            start = end;
        }

        self.epoch = epoch_index;
        let test_accuracy = self.test_inference()?;
        if let (Some(acc), Some(last)) = (test_accuracy, rows.last_mut()) {
            last.test_accuracy = Some(acc);
        }
        self.log.append_rows(rows)?;
        self.save(vocab)?;

        Ok(EpochSummary {
            epoch: epoch_index,
            mean_train_loss: loss_sum / n_batches.max(1) as f64,
            test_accuracy,
        })
    }

    fn train_step(
        &mut self,
        range: std::ops::Range<usize>,
        mask_rng: &mut ChaCha12Rng,
        val_cursor: &mut usize,
    ) -> Result<(f64, Option<f64>), ModelError> {
        let seqs = &self.train_seqs[range];
        let mask_prob = self.train_cfg.mask_prob;
        let mask_id = self.model_cfg.mask_id;

        // Masking is drawn sequentially up front so parallel execution
        // cannot perturb the stream.
        let items: Vec<(Vec<u8>, &[u8])> = seqs
            .iter()
            .map(|seq| {
                let mut input = seq[..seq.len() - 1].to_vec();
                if mask_prob > 0.0 {
                    for slot in &mut input {
                        if mask_rng.random::<f64>() < mask_prob {
                            *slot = mask_id;
                        }
                    }
                }
                (input, &seq[1..])
            })
            .collect();

        let chunk_size = items.len().div_ceil(GRAD_CHUNKS);
        let model = &self.model;
        let weights = &self.weights;
        let partials: Result<Vec<(F, Gradients<F>)>, ModelError> = items
            .par_chunks(chunk_size)
            .map(|chunk| {
                let mut acc: Option<(F, Gradients<F>)> = None;
                for (input, targets) in chunk {
                    let (loss, grads) = model.loss_and_grad(input, targets, weights)?;
                    match &mut acc {
                        None => acc = Some((loss, grads)),
                        Some((l, g)) => {
                            *l = *l + loss;
                            g.0.add_assign(&grads.0);
                        }
                    }
                }
                Ok(acc.expect("chunks are never empty"))
            })
            .collect();
        let partials = partials?;

        let mut iter = partials.into_iter();
        let (mut loss_total, mut grads) = iter.next().expect("at least one chunk");
        for (l, g) in iter {
            loss_total = loss_total + l;
            grads.0.add_assign(&g.0);
        }
        let scale: F = sc(1.0 / items.len() as f64);
        grads.0.scale(scale);
        let loss = loss_total.to_f64().unwrap_or(f64::NAN) / items.len() as f64;

        if !loss.is_finite() {
            return Err(ModelError::Diverged {
                step: self.global_step,
            });
        }

        let lr = warmup_lr(
            self.train_cfg.learning_rate,
            self.train_cfg.warmup_steps,
            self.global_step + 1,
        );
        self.optimizer.step(&mut self.model, &grads, lr);
        self.global_step += 1;

        // One clean (unmasked) validation batch per training batch, cycling
        // through the validation split without gradients.
        let val_loss = if self.val_seqs.is_empty() {
            None
        } else {
            let n = self
                .train_cfg
                .batch_size
                .min(self.val_seqs.len());
            let mut total = 0.0;
            for _ in 0..n {
                let seq = &self.val_seqs[*val_cursor % self.val_seqs.len()];
                *val_cursor += 1;
                let l = self
                    .model
                    .loss(&seq[..seq.len() - 1], &seq[1..], &self.weights)?;
                total += l.to_f64().unwrap_or(f64::NAN);
            }
            Some(total / n as f64)
        };

        Ok((loss, val_loss))
    }

    /// Greedy inference over the test split, scored with the task metric:
    /// mean forecast accuracy for the forward task, mean rule-inference
    /// accuracy for the inverse task.
    fn test_inference(&self) -> Result<Option<f64>, ModelError> {
        if self.test_fixtures.is_empty() {
            return Ok(None);
        }
        let vocab = Vocabulary::standard();
        let mut total = 0.0;
        for fixture in &self.test_fixtures {
            total += score_generation(
                &self.model,
                &vocab,
                &fixture.prompt,
                &fixture.sample,
                self.task,
            )?;
        }
        Ok(Some(total / self.test_fixtures.len() as f64))
    }

    /// Writes the checkpoint directory and vocabulary copy.
    pub fn save(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        let dir = self.checkpoint_dir();
        let meta = CheckpointMeta {
            model_name: self.model_name.clone(),
            task: self.task,
            model: self.model_cfg.clone(),
            train: self.train_cfg.clone(),
            scalar: F::DTYPE.to_string(),
            global_step: self.global_step,
            epoch: self.epoch,
            vocab_file: "vocab.txt".to_string(),
            train_log: "train_log.csv".to_string(),
        };
        save_checkpoint(&dir, &meta, &self.model, &self.optimizer)?;
        vocab.write_to(&dir.join("vocab.txt"))?;
        Ok(())
    }
}

/// Greedy-generates the withheld field for one sample and scores it with the
/// task-appropriate metric.
pub fn score_generation<F: Scalar>(
    model: &Transformer<F>,
    vocab: &Vocabulary,
    prompt: &[u8],
    sample: &Sample,
    task: Task,
) -> Result<f64, ModelError> {
    let max_new = model.config().max_seq_len - prompt.len();
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let generated = model.generate(prompt, max_new, 0.0, &mut rng)?;
    let text = vocab.decode(&generated)?;
    let scan = extract_binary(&text);
    Ok(match task {
        Task::Forward => score_forward(&scan.bits, &sample.gs2),
        Task::Inverse => {
            score_inverse(&scan.bits, &sample.ic, &sample.gs2, &sample.rm).a_rmi
        }
    })
}

/// Outcome of a full training run.
pub struct TrainOutcome {
    pub checkpoint_dir: PathBuf,
    pub log_path: PathBuf,
    pub final_test_accuracy: Option<f64>,
    pub epochs_run: u64,
    pub global_steps: u64,
}

/// Trains for the configured number of epochs and returns the checkpoint
/// and log locations. Zero epochs emits the initialized checkpoint with an
/// empty training section.
pub fn train<F: Scalar>(
    dataset: &Dataset,
    vocab: &Vocabulary,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    out_dir: &Path,
    model_name: &str,
) -> Result<TrainOutcome, ModelError> {
    let epochs = train_cfg.epochs;
    let mut session = TrainSession::<F>::new(
        dataset, vocab, model_cfg, train_cfg, out_dir, model_name,
    )?;
    let mut last_acc = None;
    for _ in 0..epochs {
        let summary = session.run_epoch(vocab)?;
        last_acc = summary.test_accuracy;
    }
    Ok(TrainOutcome {
        checkpoint_dir: session.checkpoint_dir(),
        log_path: session.log().path().to_path_buf(),
        final_test_accuracy: last_acc,
        epochs_run: session.epoch(),
        global_steps: session.global_step(),
    })
}
