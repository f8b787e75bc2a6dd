use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use automata_model::{ModelConfig, TrainConfig, TrainSession};
use automata_pipeline::{Task, Vocabulary};

use crate::common::{load_dataset, write_run_manifest};

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Must match the dataset's task.
    #[arg(long)]
    pub task: Task,
    /// Dataset directory or manifest path produced by `gen`.
    #[arg(long)]
    pub data: PathBuf,
    /// Initialization / masking seed; mandatory for reproducibility.
    #[arg(long)]
    pub seed: u64,
    /// Output directory for the checkpoint and training log.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub dim: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 4)]
    pub heads: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 50)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.15)]
    pub mask_prob: f64,
    /// Linear warm-up horizon in optimizer steps.
    #[arg(long, default_value_t = 1000)]
    pub warmup: usize,
    /// Restrict the loss to the generation suffix (ablation).
    #[arg(long)]
    pub suffix_loss: bool,
    /// Continue from an existing checkpoint directory; model shape flags
    /// are taken from the checkpoint and `--epochs` counts additional
    /// epochs.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Name recorded in the checkpoint and downstream reports.
    #[arg(long, default_value = "model")]
    pub model_name: String,
}

#[derive(Serialize)]
struct ResolvedTrain {
    command: &'static str,
    task: Task,
    model: ModelConfig,
    train: TrainConfig,
    model_name: String,
    resumed: bool,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&args.data)?;
    if dataset.task != args.task {
        bail!(
            "--task {} does not match the dataset task {}",
            args.task,
            dataset.task
        );
    }

    let vocab = Vocabulary::standard();
    let model_cfg = ModelConfig {
        dim: args.dim,
        depth: args.depth,
        heads: args.heads,
        ..ModelConfig::default()
    };
    let train_cfg = TrainConfig {
        learning_rate: args.lr,
        batch_size: args.batch_size,
        mask_prob: args.mask_prob,
        warmup_steps: args.warmup,
        epochs: args.epochs,
        seed: args.seed,
        loss_suffix_only: args.suffix_loss,
        ..TrainConfig::default()
    };

    let mut session = match &args.resume {
        Some(ckpt) => {
            let resolved = ResolvedTrain {
                command: "train",
                task: args.task,
                model: automata_model::load_meta(ckpt)?.model,
                train: train_cfg.clone(),
                model_name: args.model_name.clone(),
                resumed: true,
            };
            write_run_manifest(&args.out, &resolved)?;
            TrainSession::<f32>::resume(ckpt, &dataset, &vocab, &args.out)?
        }
        None => {
            let resolved = ResolvedTrain {
                command: "train",
                task: args.task,
                model: model_cfg.clone(),
                train: train_cfg.clone(),
                model_name: args.model_name.clone(),
                resumed: false,
            };
            write_run_manifest(&args.out, &resolved)?;
            TrainSession::<f32>::new(
                &dataset,
                &vocab,
                model_cfg,
                train_cfg,
                &args.out,
                &args.model_name,
            )?
        }
    };

    println!(
        "train: {} parameters, {} steps/epoch, task {}",
        session.model().param_count(),
        session.steps_per_epoch(),
        args.task
    );
    for _ in 0..args.epochs {
        let summary = session.run_epoch(&vocab)?;
        match summary.test_accuracy {
            Some(acc) => println!(
                "epoch {:>3}  loss {:.5}  test accuracy {:.4}",
                summary.epoch, summary.mean_train_loss, acc
            ),
            None => println!(
                "epoch {:>3}  loss {:.5}",
                summary.epoch, summary.mean_train_loss
            ),
        }
    }
    println!(
        "train: checkpoint at {}, log at {}",
        session.checkpoint_dir().display(),
        session.log().path().display()
    );
    Ok(())
}
