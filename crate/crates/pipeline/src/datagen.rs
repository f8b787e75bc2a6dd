//! Stochastic initial-condition generation, triad assembly, instruction
//! formatting, shuffling, and 90/9/1 splitting.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use automata_core::{step, Grid, RuleId, RulesMatrix, TrainingRuleSet, RULE_FLAT_LEN};

use crate::error::PipelineError;

/// Which field the model is asked to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Forward,
    Inverse,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Forward => "forward",
            Task::Inverse => "inverse",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" => Ok(Task::Forward),
            "inverse" => Ok(Task::Inverse),
            other => Err(format!("unknown task '{other}' (expected forward or inverse)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// State-probability weights for cell assignment: deltas[k] is the
/// probability of drawing state k, and the deltas telescope to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderParameters {
    deltas: [f64; 2],
}

impl OrderParameters {
    /// Draws one uniform breakpoint p1 in the open interval (0, 1), giving
    /// deltas [p1, 1 - p1].
    pub fn generate(rng: &mut impl Rng) -> Self {
        let p1 = loop {
            let draw: f64 = rng.random();
            if draw > 0.0 {
                break draw;
            }
        };
        Self {
            deltas: [p1, 1.0 - p1],
        }
    }

    /// Explicit breakpoint, permitting the degenerate endpoints 0 and 1.
    pub fn from_p1(p1: f64) -> Self {
        assert!((0.0..=1.0).contains(&p1), "p1 must lie in [0, 1]");
        Self {
            deltas: [p1, 1.0 - p1],
        }
    }

    pub fn deltas(&self) -> [f64; 2] {
        self.deltas
    }
}

/// Assigns each cell independently: draw a fresh uniform eta in [0, 1) and
/// pick the smallest state k with eta below the cumulative delta sum.
pub fn generate_ic(
    params: &OrderParameters,
    width: usize,
    height: usize,
    rng: &mut impl Rng,
) -> Grid {
    let cutoff = params.deltas[0];
    let cells: Vec<u8> = (0..width * height)
        .map(|_| {
            let eta: f64 = rng.random();
            u8::from(eta >= cutoff)
        })
        .collect();
    Grid::from_cells(width, height, cells).expect("generated cells are binary")
}

/// One IC-GS2-rule triad with its metadata.
#[derive(Clone, Debug)]
pub struct Sample {
    pub ic: Grid,
    pub gs2: Grid,
    pub rm: RulesMatrix,
    pub rule_id: RuleId,
    pub split: Split,
}

/// Counts and provenance for a generated dataset. File references are
/// basenames relative to the manifest's own directory.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DatasetManifest {
    pub task: Task,
    pub n_rm: usize,
    pub ics_per_rule: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    pub broad_entropy: bool,
    pub rules_file: String,
    pub dataset_file: String,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub task: Task,
    pub manifest: DatasetManifest,
}

impl Dataset {
    /// Contiguous (train, validation, test) views over the shuffled list.
    pub fn splits(&self) -> (&[Sample], &[Sample], &[Sample]) {
        let n_train = self.manifest.n_train;
        let n_val = self.manifest.n_validation;
        (
            &self.samples[..n_train],
            &self.samples[n_train..n_train + n_val],
            &self.samples[n_train + n_val..],
        )
    }
}

/// Floor/remainder split sizes: 90% train, 9% validation, rest test.
pub fn split_sizes(total: usize) -> (usize, usize, usize) {
    let train = total * 90 / 100;
    let validation = total * 9 / 100;
    (train, validation, total - train - validation)
}

/// Generates `ics_per_rule` fresh (order parameters, IC) pairs per rule,
/// computes each GS2 exactly, shuffles the pool with the seeded generator,
/// and assigns splits 90/9/1 in shuffled order.
///
/// The random stream never depends on `task`, so the same seed yields the
/// same triads for both layouts.
pub fn build_dataset(
    rules: &TrainingRuleSet,
    ics_per_rule: usize,
    task: Task,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut samples = generate_triads(rules, ics_per_rule, &mut rng);
    samples.shuffle(&mut rng);

    let (n_train, n_val, n_test) = split_sizes(samples.len());
    for (i, sample) in samples.iter_mut().enumerate() {
        sample.split = if i < n_train {
            Split::Train
        } else if i < n_train + n_val {
            Split::Validation
        } else {
            Split::Test
        };
    }

    Dataset {
        samples,
        task,
        manifest: DatasetManifest {
            task,
            n_rm: rules.len(),
            ics_per_rule,
            seed,
            n_train,
            n_validation: n_val,
            n_test,
            broad_entropy: false,
            rules_file: String::new(),
            dataset_file: String::new(),
        },
    }
}

/// Builds the shared cross-model test set: every sample is test, no split
/// arithmetic. The conventional configuration is 100 rules at 2 ICs each.
pub fn build_shared_test_set(
    rules: &TrainingRuleSet,
    ics_per_rule: usize,
    task: Task,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut samples = generate_triads(rules, ics_per_rule, &mut rng);
    samples.shuffle(&mut rng);
    for sample in &mut samples {
        sample.split = Split::Test;
    }
    let n = samples.len();
    Dataset {
        samples,
        task,
        manifest: DatasetManifest {
            task,
            n_rm: rules.len(),
            ics_per_rule,
            seed,
            n_train: 0,
            n_validation: 0,
            n_test: n,
            broad_entropy: false,
            rules_file: String::new(),
            dataset_file: String::new(),
        },
    }
}

fn generate_triads(
    rules: &TrainingRuleSet,
    ics_per_rule: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<Sample> {
    let mut samples = Vec::with_capacity(rules.len() * ics_per_rule);
    for rm in rules.rules() {
        for _ in 0..ics_per_rule {
            let params = OrderParameters::generate(rng);
            let ic = generate_ic(&params, 16, 16, rng);
            let gs2 = step(&ic, rm);
            samples.push(Sample {
                ic,
                gs2,
                rm: *rm,
                rule_id: rm.id(),
                split: Split::Train,
            });
        }
    }
    samples
}

/// Reorders the train split in place so consecutive batches span the full
/// IC-density range: samples are bucketed by density decile and dealt out
/// round-robin. Validation and test splits are untouched.
pub fn broad_entropy_order(dataset: &mut Dataset) {
    let n_train = dataset.manifest.n_train;
    let train = &mut dataset.samples[..n_train];
    let mut buckets: Vec<Vec<Sample>> = vec![Vec::new(); 10];
    for sample in train.iter() {
        let decile = ((sample.ic.density() * 10.0) as usize).min(9);
        buckets[decile].push(sample.clone());
    }
    let mut cursor = 0usize;
    let mut queues: Vec<std::vec::IntoIter<Sample>> =
        buckets.into_iter().map(Vec::into_iter).collect();
    let mut remaining = n_train;
    while remaining > 0 {
        for queue in &mut queues {
            if let Some(sample) = queue.next() {
                train[cursor] = sample;
                cursor += 1;
                remaining -= 1;
            }
        }
    }
    dataset.manifest.broad_entropy = true;
}

/// Serializes one triad into its instruction-format line. Both layouts hold
/// 7 structural specials plus 548 data tokens: 555 tokens for 16x16 grids.
pub fn format_sample(sample: &Sample, task: Task) -> String {
    format_triad(&sample.ic, &sample.gs2, &sample.rm, task)
}

/// Formatting over bare fields, used by both dataset emission and tests.
pub fn format_triad(ic: &Grid, gs2: &Grid, rm: &RulesMatrix, task: Task) -> String {
    let rm_str = rm
        .flatten()
        .iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    let ic_str = ic.to_field_string();
    let gs2_str = gs2.to_field_string();
    match task {
        Task::Forward => format!(
            "[BOS] [R] {rm_str} [BIC] {ic_str} [EIC] [BGS2] {gs2_str} [EGS2] [EOS]"
        ),
        Task::Inverse => format!(
            "[BOS] [BIC] {ic_str} [EIC] [BGS2] {gs2_str} [EGS2] [R] {rm_str} [EOS]"
        ),
    }
}

/// Parses an instruction-format line back into its triad, validating the
/// structural specials at their fixed positions.
pub fn parse_sample(line: &str, task: Task) -> Result<(Grid, Grid, RulesMatrix), PipelineError> {
    parse_sample_at(line, task, 0)
}

/// Like [`parse_sample`] but errors carry the 1-based `line_number`.
pub fn parse_sample_at(
    line: &str,
    task: Task,
    line_number: usize,
) -> Result<(Grid, Grid, RulesMatrix), PipelineError> {
    let fail = |reason: String| PipelineError::SampleParse {
        line: line_number,
        reason,
    };
    let units: Vec<&str> = line.split_whitespace().collect();
    if units.len() != 555 {
        return Err(fail(format!("expected 555 tokens, got {}", units.len())));
    }

    let expect = |idx: usize, tok: &str| -> Result<(), PipelineError> {
        if units[idx] != tok {
            Err(fail(format!(
                "expected '{tok}' at token {idx}, found '{}'",
                units[idx]
            )))
        } else {
            Ok(())
        }
    };
    let binary_run = |range: std::ops::Range<usize>| -> Result<Vec<u8>, PipelineError> {
        let mut out = Vec::with_capacity(range.len());
        for idx in range {
            match units[idx] {
                "0" => out.push(0),
                "1" => out.push(1),
                other => return Err(fail(format!("expected binary token at {idx}, found '{other}'"))),
            }
        }
        Ok(out)
    };

    let (rm_flat, ic_vals, gs2_vals) = match task {
        Task::Forward => {
            expect(0, "[BOS]")?;
            expect(1, "[R]")?;
            expect(38, "[BIC]")?;
            expect(295, "[EIC]")?;
            expect(296, "[BGS2]")?;
            expect(553, "[EGS2]")?;
            expect(554, "[EOS]")?;
            (binary_run(2..38)?, binary_run(39..295)?, binary_run(297..553)?)
        }
        Task::Inverse => {
            expect(0, "[BOS]")?;
            expect(1, "[BIC]")?;
            expect(258, "[EIC]")?;
            expect(259, "[BGS2]")?;
            expect(516, "[EGS2]")?;
            expect(517, "[R]")?;
            expect(554, "[EOS]")?;
            (binary_run(518..554)?, binary_run(2..258)?, binary_run(260..516)?)
        }
    };

    debug_assert_eq!(rm_flat.len(), RULE_FLAT_LEN);
    let rm = RulesMatrix::from_flat(&rm_flat)
        .map_err(|e| fail(format!("invalid rules matrix: {e}")))?;
    let ic = Grid::from_field_values(16, 16, &ic_vals)
        .map_err(|e| fail(format!("invalid IC field: {e}")))?;
    let gs2 = Grid::from_field_values(16, 16, &gs2_vals)
        .map_err(|e| fail(format!("invalid GS2 field: {e}")))?;
    Ok((ic, gs2, rm))
}

/// Writes the newline-delimited dataset file, one instruction line per
/// sample in order.
pub fn write_dataset_file(dataset: &Dataset, path: &Path) -> Result<(), PipelineError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for sample in &dataset.samples {
        writeln!(out, "{}", format_sample(sample, dataset.task))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every line of a dataset file.
pub fn read_dataset_lines(path: &Path) -> Result<Vec<String>, PipelineError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push(line);
        }
    }
    Ok(lines)
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<(), PipelineError> {
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest, PipelineError> {
    let json = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&json)?)
}
