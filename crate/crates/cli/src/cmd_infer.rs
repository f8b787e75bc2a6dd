use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use automata_core::{canonical_completion, infer_constraints, step};
use automata_model::{load_checkpoint, prompt_len};
use automata_pipeline::{parse_sample_at, Task, Vocabulary};

use crate::common::{load_eval_lines, write_run_manifest};

#[derive(Args, Debug)]
pub struct InferArgs {
    #[arg(long)]
    pub task: Task,
    /// Test set: a raw dataset file (every line is scored) or a dataset
    /// directory/manifest (only the test split is scored).
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for predictions.txt.
    #[arg(long)]
    pub out: PathBuf,
    /// Checkpoint directory from `train`; required unless --exact.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Use the exact solver instead of a model: one-step evolution for the
    /// forward task, the canonical consistent rule (plus a degeneracy
    /// report) for the inverse task.
    #[arg(long)]
    pub exact: bool,
    /// Sampling temperature; 0 is strict argmax decoding.
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    /// RNG seed for temperature sampling (unused at temperature 0).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct ResolvedInfer {
    command: &'static str,
    task: Task,
    exact: bool,
    temperature: f64,
    seed: u64,
    checkpoint_model: Option<String>,
}

pub fn run(args: InferArgs) -> Result<()> {
    if !args.exact && args.checkpoint.is_none() {
        bail!("either --checkpoint or --exact is required");
    }

    let checkpoint = match (&args.checkpoint, args.exact) {
        (Some(dir), false) => {
            let ckpt = load_checkpoint::<f32>(dir)
                .with_context(|| format!("loading checkpoint {}", dir.display()))?;
            if ckpt.meta.task != args.task {
                bail!(
                    "checkpoint was trained for the {} task, not {}",
                    ckpt.meta.task,
                    args.task
                );
            }
            Some(ckpt)
        }
        _ => None,
    };

    let resolved = ResolvedInfer {
        command: "infer",
        task: args.task,
        exact: args.exact,
        temperature: args.temperature,
        seed: args.seed,
        checkpoint_model: checkpoint.as_ref().map(|c| c.meta.model_name.clone()),
    };
    write_run_manifest(&args.out, &resolved)?;

    let (lines, _) = load_eval_lines(&args.data, args.task)?;
    if lines.is_empty() {
        bail!("no samples to infer in {}", args.data.display());
    }

    let vocab = Vocabulary::standard();
    let mut rng = ChaCha12Rng::seed_from_u64(args.seed);
    let mut predictions =
        std::io::BufWriter::new(std::fs::File::create(args.out.join("predictions.txt"))?);
    let mut degeneracy: Option<std::io::BufWriter<std::fs::File>> =
        if args.exact && args.task == Task::Inverse {
            let mut w =
                std::io::BufWriter::new(std::fs::File::create(args.out.join("degeneracy.csv"))?);
            writeln!(w, "index,free_columns,consistent_count")?;
            Some(w)
        } else {
            None
        };

    for (i, line) in lines.iter().enumerate() {
        let (ic, gs2, _rm) = parse_sample_at(line, args.task, i + 1)?;
        let text = if args.exact {
            match args.task {
                Task::Forward => {
                    let computed = step(&ic, &_rm);
                    format!("{} [EGS2] [EOS]", computed.to_field_string())
                }
                Task::Inverse => {
                    let constraints = infer_constraints(&ic, &gs2)
                        .with_context(|| format!("sample {} is not a deterministic transition", i + 1))?;
                    if let Some(w) = degeneracy.as_mut() {
                        writeln!(
                            w,
                            "{},{},{}",
                            i,
                            constraints.free_count(),
                            constraints.degeneracy()
                        )?;
                    }
                    let rm = canonical_completion(&constraints);
                    let entries: Vec<String> =
                        rm.flatten().iter().map(|e| e.to_string()).collect();
                    format!("{} [EOS]", entries.join(" "))
                }
            }
        } else {
            let ckpt = checkpoint.as_ref().expect("checked above");
            let full = vocab.encode(line)?;
            let prompt = &full[..prompt_len(args.task)];
            let max_new = ckpt.meta.model.max_seq_len - prompt.len();
            let generated = ckpt
                .model
                .generate(prompt, max_new, args.temperature, &mut rng)?;
            vocab.decode(&generated)?
        };
        writeln!(predictions, "{text}")?;
    }
    predictions.flush()?;
    if let Some(mut w) = degeneracy {
        w.flush()?;
    }

    println!(
        "infer: {} predictions ({}) -> {}",
        lines.len(),
        if args.exact { "exact solver" } else { "checkpoint" },
        args.out.display()
    );
    Ok(())
}
