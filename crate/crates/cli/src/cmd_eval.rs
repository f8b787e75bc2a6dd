use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use automata_core::{DistanceMetric, TrainingRuleSet};
use automata_pipeline::{
    aggregate, default_bin_edges, emit_report, extract_binary, parse_sample_at,
    regress_accuracy_vs_distance, score_forward, score_inverse, AccuracyKind, DistanceTriple,
    EvalRecord, EvalReport, PipelineError, ReportDatasetInfo, TaggedRegression, Task,
};

use crate::common::{load_eval_lines, write_run_manifest};

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub task: Task,
    /// Predictions file from `infer` (or a directory holding
    /// predictions.txt).
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth test set: the same file or manifest given to `infer`.
    #[arg(long)]
    pub data: PathBuf,
    /// Training rule-set file of the model under evaluation; nearest-rule
    /// distances are measured against it.
    #[arg(long)]
    pub rules: PathBuf,
    /// Output directory for the report files.
    #[arg(long)]
    pub out: PathBuf,
    /// Name recorded in the report.
    #[arg(long, default_value = "model")]
    pub model_name: String,
}

#[derive(Serialize)]
struct ResolvedEval {
    command: &'static str,
    task: Task,
    model_name: String,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let resolved = ResolvedEval {
        command: "eval",
        task: args.task,
        model_name: args.model_name.clone(),
    };
    write_run_manifest(&args.out, &resolved)?;

    let pred_path = if args.pred.is_dir() {
        args.pred.join("predictions.txt")
    } else {
        args.pred.clone()
    };
    let predictions = automata_pipeline::read_dataset_lines(&pred_path)
        .with_context(|| format!("reading predictions {}", pred_path.display()))?;
    let (truth_lines, manifest) = load_eval_lines(&args.data, args.task)?;
    if predictions.len() != truth_lines.len() {
        bail!(
            "{}",
            PipelineError::RecordCountMismatch {
                predictions: predictions.len(),
                samples: truth_lines.len(),
            }
        );
    }
    if predictions.is_empty() {
        bail!("nothing to evaluate");
    }

    let rules = TrainingRuleSet::read_from(&args.rules)
        .with_context(|| format!("reading training rules {}", args.rules.display()))?;

    let mut records = Vec::with_capacity(predictions.len());
    for (i, (pred, truth)) in predictions.iter().zip(&truth_lines).enumerate() {
        let (ic, gs2, rm) = parse_sample_at(truth, args.task, i + 1)?;
        let scan = extract_binary(pred);
        let record = match args.task {
            Task::Forward => EvalRecord {
                index: i,
                rule_id: rm.id().value(),
                a_primary: score_forward(&scan.bits, &gs2),
                a_irma: None,
                flag: None,
                distances: Some(DistanceTriple::nearest_two(&rm, &rules)?),
            },
            Task::Inverse => {
                let score = score_inverse(&scan.bits, &ic, &gs2, &rm);
                EvalRecord {
                    index: i,
                    rule_id: rm.id().value(),
                    a_primary: score.a_rmi,
                    a_irma: Some(score.a_irma),
                    flag: Some(score.flag),
                    distances: Some(DistanceTriple::nearest_two(&rm, &rules)?),
                }
            }
        };
        records.push(record);
    }

    let summary = aggregate(&records, &default_bin_edges())?;

    let mut regressions = Vec::new();
    if args.task == Task::Inverse {
        for metric in DistanceMetric::ALL {
            for accuracy in [AccuracyKind::Rmi, AccuracyKind::Irma] {
                match regress_accuracy_vs_distance(&records, metric, accuracy) {
                    Ok(fit) => regressions.push(TaggedRegression {
                        distance_metric: metric.name().to_string(),
                        accuracy,
                        fit,
                    }),
                    Err(e) => eprintln!(
                        "eval: skipping {} x {} regression: {e}",
                        metric.name(),
                        accuracy.name()
                    ),
                }
            }
        }
    }

    let report = EvalReport {
        model_name: args.model_name.clone(),
        task: args.task,
        training_n_rm: rules.len(),
        dataset: manifest.map(|m| ReportDatasetInfo {
            task: m.task,
            n_rm: m.n_rm,
            ics_per_rule: m.ics_per_rule,
            seed: m.seed,
            n_test: m.n_test,
        }),
        summary: summary.clone(),
        regressions,
    };
    let written = emit_report(&report, &records, &args.out)?;

    println!(
        "eval: N_S = {} samples, task {}",
        summary.n_samples, args.task
    );
    match args.task {
        Task::Forward => println!(
            "eval: mean A_GS2I = {:.4}, f_p = {:.4}",
            summary.mean_primary, summary.f_p
        ),
        Task::Inverse => println!(
            "eval: mean A_RMI = {:.4}, mean A_IRMA = {:.4}, f_p = {:.4}, f_e = {:.4}",
            summary.mean_primary,
            summary.mean_irma.unwrap_or(f64::NAN),
            summary.f_p,
            summary.f_e.unwrap_or(f64::NAN)
        ),
    }
    println!("eval: {} report files -> {}", written.len(), args.out.display());
    Ok(())
}
