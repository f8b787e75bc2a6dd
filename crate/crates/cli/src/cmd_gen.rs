use std::collections::HashSet;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use automata_core::{RuleId, TrainingRuleSet};
use automata_pipeline::{
    broad_entropy_order, build_dataset, build_shared_test_set, write_dataset_file, write_manifest,
    Task,
};

use crate::common::write_run_manifest;

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Problem layout for the emitted instruction strings.
    #[arg(long)]
    pub task: Task,
    /// Number of distinct rules; defaults to 100 for the shared test set.
    #[arg(long)]
    pub n_rm: Option<usize>,
    /// Initial conditions per rule; defaults keep the total at
    /// min(n_rm * 10^4, 10^6), or 2 for the shared test set.
    #[arg(long)]
    pub ics_per_rule: Option<usize>,
    /// Generator seed; mandatory so every dataset is reproducible.
    #[arg(long)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Build the cross-model shared test set (all samples are test).
    #[arg(long)]
    pub testset_shared: bool,
    /// Reorder the train split round-robin over IC-density deciles.
    #[arg(long)]
    pub broad_entropy: bool,
    /// Reuse an existing rule-set file instead of drawing fresh rules.
    #[arg(long)]
    pub rules_file: Option<PathBuf>,
    /// Rule-set files whose rules must not appear in this set (repeatable);
    /// keeps test rules disjoint from training rules.
    #[arg(long)]
    pub exclude_rules: Vec<PathBuf>,
}

#[derive(Serialize)]
struct ResolvedGen {
    command: &'static str,
    task: Task,
    n_rm: usize,
    ics_per_rule: usize,
    seed: u64,
    testset_shared: bool,
    broad_entropy: bool,
    rules_reused: bool,
    n_excluded_rules: usize,
}

pub fn run(args: GenArgs) -> Result<()> {
    let n_rm = match (args.n_rm, args.testset_shared, &args.rules_file) {
        (Some(n), _, _) => n,
        (None, true, None) => 100,
        (None, _, Some(path)) => TrainingRuleSet::read_from(path)?.len(),
        (None, false, None) => bail!("--n-rm is required unless --testset-shared or --rules-file is given"),
    };
    if n_rm == 0 {
        bail!("--n-rm must be positive");
    }
    let ics_per_rule = args.ics_per_rule.unwrap_or(if args.testset_shared {
        2
    } else {
        (1_000_000 / n_rm).clamp(1, 10_000)
    });

    let resolved = ResolvedGen {
        command: "gen",
        task: args.task,
        n_rm,
        ics_per_rule,
        seed: args.seed,
        testset_shared: args.testset_shared,
        broad_entropy: args.broad_entropy,
        rules_reused: args.rules_file.is_some(),
        n_excluded_rules: args.exclude_rules.len(),
    };
    write_run_manifest(&args.out, &resolved)?;

    let mut excluded: HashSet<RuleId> = HashSet::new();
    for path in &args.exclude_rules {
        let set = TrainingRuleSet::read_from(path)
            .with_context(|| format!("reading exclusion rules {}", path.display()))?;
        excluded.extend(set.ids());
    }

    let rules = match &args.rules_file {
        Some(path) => {
            let set = TrainingRuleSet::read_from(path)?;
            if set.len() != n_rm {
                bail!(
                    "--rules-file holds {} rules but --n-rm asked for {n_rm}",
                    set.len()
                );
            }
            if !excluded.is_empty() && !set.ids().is_disjoint(&excluded) {
                bail!("--rules-file overlaps the excluded rule sets");
            }
            set
        }
        None => TrainingRuleSet::generate_excluding(n_rm, args.seed, &excluded)?,
    };

    let mut dataset = if args.testset_shared {
        build_shared_test_set(&rules, ics_per_rule, args.task, args.seed)
    } else {
        build_dataset(&rules, ics_per_rule, args.task, args.seed)
    };
    if args.broad_entropy {
        broad_entropy_order(&mut dataset);
    }
    dataset.manifest.rules_file = "rules.tsv".to_string();
    dataset.manifest.dataset_file = "dataset.txt".to_string();

    rules.write_to(&args.out.join("rules.tsv"))?;
    write_dataset_file(&dataset, &args.out.join("dataset.txt"))?;
    write_manifest(&dataset.manifest, &args.out.join("manifest.json"))?;

    println!(
        "gen: {} samples ({} rules x {} ICs, task {}) -> {}",
        dataset.samples.len(),
        n_rm,
        ics_per_rule,
        args.task,
        args.out.display()
    );
    println!(
        "gen: splits train/validation/test = {}/{}/{}",
        dataset.manifest.n_train, dataset.manifest.n_validation, dataset.manifest.n_test
    );
    Ok(())
}
