//! Per-sample accuracy metrics, aggregates, accuracy-vs-dissimilarity
//! regressions, and report emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use automata_core::{
    mean_nearest_distance, step, validate_rm, DistanceMetric, Grid, RmValidity, RulesMatrix,
    TrainingRuleSet,
};

use crate::datagen::Task;
use crate::error::PipelineError;

/// Positionwise forecast accuracy: agreements over the 256 truth cells.
/// Missing positions in a short prediction count as incorrect; surplus
/// predictions are ignored.
pub fn score_forward(predicted: &[u8], truth: &Grid) -> f64 {
    let cells = truth.cells();
    let total = cells.len();
    let correct = cells
        .iter()
        .zip(predicted.iter())
        .filter(|(&t, &p)| t == p)
        .count();
    correct as f64 / total as f64
}

/// Classification of an inverse inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseFlag {
    /// Inferred rule equals ground truth.
    Perfect,
    /// Inferred rule differs from ground truth but reproduces GS2 exactly.
    DegeneratePerfect,
    /// Logical rule with imperfect application.
    Imperfect,
    /// Columns do not each sum to 1.
    Illogical,
    /// Output did not reshape to 36 entries; scored as illogical.
    Malformed,
}

impl InverseFlag {
    pub fn name(self) -> &'static str {
        match self {
            InverseFlag::Perfect => "perfect",
            InverseFlag::DegeneratePerfect => "degenerate-perfect",
            InverseFlag::Imperfect => "imperfect",
            InverseFlag::Illogical => "illogical",
            InverseFlag::Malformed => "malformed",
        }
    }

    pub fn counts_as_error(self) -> bool {
        matches!(self, InverseFlag::Illogical | InverseFlag::Malformed)
    }
}

impl std::str::FromStr for InverseFlag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(InverseFlag::Perfect),
            "degenerate-perfect" => Ok(InverseFlag::DegeneratePerfect),
            "imperfect" => Ok(InverseFlag::Imperfect),
            "illogical" => Ok(InverseFlag::Illogical),
            "malformed" => Ok(InverseFlag::Malformed),
            other => Err(format!("unknown inverse flag '{other}'")),
        }
    }
}

/// Rule-inference and rule-application accuracies for one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseScore {
    pub a_rmi: f64,
    pub a_irma: f64,
    pub flag: InverseFlag,
}

/// Scores an inferred rule against a ground-truth triad.
///
/// Illogical or malformed outputs score (0, 0). Otherwise the candidate is
/// applied to the IC for one step; an exact GS2 reproduction earns full
/// inference credit even when the rule differs from ground truth (a
/// degenerate solution). Imperfect applications fall back to the fraction of
/// matching rule tokens.
pub fn score_inverse(
    predicted_tokens: &[u8],
    ic: &Grid,
    gs2: &Grid,
    truth_rm: &RulesMatrix,
) -> InverseScore {
    if predicted_tokens.len() != 36 {
        return InverseScore {
            a_rmi: 0.0,
            a_irma: 0.0,
            flag: InverseFlag::Malformed,
        };
    }
    let candidate = match validate_rm(predicted_tokens) {
        RmValidity::Logical(rm) => rm,
        RmValidity::Illogical => {
            return InverseScore {
                a_rmi: 0.0,
                a_irma: 0.0,
                flag: InverseFlag::Illogical,
            }
        }
    };

    let computed = step(ic, &candidate);
    let a_irma = score_forward(computed.cells(), gs2);

    if a_irma == 1.0 {
        let flag = if candidate == *truth_rm {
            InverseFlag::Perfect
        } else {
            InverseFlag::DegeneratePerfect
        };
        return InverseScore {
            a_rmi: 1.0,
            a_irma,
            flag,
        };
    }

    let truth_flat = truth_rm.flatten();
    let matching = truth_flat
        .iter()
        .zip(predicted_tokens.iter())
        .filter(|(&t, &p)| t == p)
        .count();
    InverseScore {
        a_rmi: matching as f64 / 36.0,
        a_irma,
        flag: InverseFlag::Imperfect,
    }
}

/// Three mean-nearest dissimilarities from one test rule to a training set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriple {
    pub hamming: f64,
    pub jaccard: f64,
    pub jsd: f64,
}

impl DistanceTriple {
    /// Mean distance to the two nearest training rules under each metric.
    pub fn nearest_two(
        query: &RulesMatrix,
        trainset: &TrainingRuleSet,
    ) -> Result<Self, PipelineError> {
        Ok(Self {
            hamming: mean_nearest_distance(query, trainset, DistanceMetric::Hamming)?,
            jaccard: mean_nearest_distance(query, trainset, DistanceMetric::Jaccard)?,
            jsd: mean_nearest_distance(query, trainset, DistanceMetric::Jsd)?,
        })
    }

    pub fn by_metric(&self, metric: DistanceMetric) -> f64 {
        match metric {
            DistanceMetric::Hamming => self.hamming,
            DistanceMetric::Jaccard => self.jaccard,
            DistanceMetric::Jsd => self.jsd,
        }
    }
}

/// One scored test sample.
#[derive(Clone, Debug)]
pub struct EvalRecord {
    pub index: usize,
    pub rule_id: u32,
    /// A_GS2I for the forward task, A_RMI for the inverse task.
    pub a_primary: f64,
    /// A_IRMA; inverse task only.
    pub a_irma: Option<f64>,
    pub flag: Option<InverseFlag>,
    pub distances: Option<DistanceTriple>,
}

/// Histogram over accuracy bins; the last bin is closed on the right so 1.0
/// is counted.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub fractions: Vec<f64>,
}

/// Default bin edges: ten equal accuracy ranges.
pub fn default_bin_edges() -> Vec<f64> {
    (0..=10).map(|i| f64::from(i) / 10.0).collect()
}

fn histogram(values: &[f64], edges: &[f64]) -> Histogram {
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let mut placed = false;
        for b in 0..bins {
            let last = b == bins - 1;
            if v >= edges[b] && (v < edges[b + 1] || (last && v <= edges[b + 1])) {
                counts[b] += 1;
                placed = true;
                break;
            }
        }
        debug_assert!(placed, "value {v} fell outside histogram edges");
    }
    let total = values.len().max(1) as f64;
    Histogram {
        edges: edges.to_vec(),
        fractions: counts.iter().map(|&c| c as f64 / total).collect(),
    }
}

/// Aggregate statistics over a scored test set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalSummary {
    pub task: Task,
    pub n_samples: usize,
    /// Mean A_GS2I (forward) or mean A_RMI (inverse).
    pub mean_primary: f64,
    /// Mean A_IRMA; inverse task only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_irma: Option<f64>,
    /// Fraction of samples with a perfect primary accuracy of exactly 1.
    pub f_p: f64,
    /// Fraction of illogical (including malformed) inferences; inverse only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_e: Option<f64>,
    pub histogram_primary: Histogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram_irma: Option<Histogram>,
}

/// Folds per-sample records into means, perfect/error fractions, and binned
/// histograms. Means include illogical zeros: averages run over all samples.
pub fn aggregate(records: &[EvalRecord], edges: &[f64]) -> Result<EvalSummary, PipelineError> {
    if records.is_empty() {
        return Err(PipelineError::EmptyRecords);
    }
    let n = records.len();
    let task = if records[0].a_irma.is_some() {
        Task::Inverse
    } else {
        Task::Forward
    };
    let primary: Vec<f64> = records.iter().map(|r| r.a_primary).collect();
    let mean_primary = primary.iter().sum::<f64>() / n as f64;
    let f_p = primary.iter().filter(|&&a| a == 1.0).count() as f64 / n as f64;

    let (mean_irma, f_e, histogram_irma) = if task == Task::Inverse {
        let irma: Vec<f64> = records.iter().map(|r| r.a_irma.unwrap_or(0.0)).collect();
        let errors = records
            .iter()
            .filter(|r| r.flag.is_some_and(InverseFlag::counts_as_error))
            .count();
        (
            Some(irma.iter().sum::<f64>() / n as f64),
            Some(errors as f64 / n as f64),
            Some(histogram(&irma, edges)),
        )
    } else {
        (None, None, None)
    };

    Ok(EvalSummary {
        task,
        n_samples: n,
        mean_primary,
        mean_irma,
        f_p,
        f_e,
        histogram_primary: histogram(&primary, edges),
        histogram_irma,
    })
}

/// Which accuracy a regression is fitted against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccuracyKind {
    Rmi,
    Irma,
}

impl AccuracyKind {
    pub fn name(self) -> &'static str {
        match self {
            AccuracyKind::Rmi => "rmi",
            AccuracyKind::Irma => "irma",
        }
    }
}

/// Ordinary-least-squares fit of accuracy against mean nearest distance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Fits accuracy against the chosen dissimilarity over inverse records,
/// excluding accuracies of exactly 0 or 1 (illogical and perfect inferences
/// respectively) before fitting.
pub fn regress_accuracy_vs_distance(
    records: &[EvalRecord],
    metric: DistanceMetric,
    accuracy: AccuracyKind,
) -> Result<RegressionResult, PipelineError> {
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| {
            let a = match accuracy {
                AccuracyKind::Rmi => r.a_primary,
                AccuracyKind::Irma => r.a_irma?,
            };
            if a == 0.0 || a == 1.0 {
                return None;
            }
            let d = r.distances?.by_metric(metric);
            Some((d, a))
        })
        .collect();
    ols(&points)
}

/// Simple OLS with intercept over (x, y) points.
pub fn ols(points: &[(f64, f64)]) -> Result<RegressionResult, PipelineError> {
    let n = points.len();
    if n < 3 {
        return Err(PipelineError::InsufficientData { got: n });
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(PipelineError::DegenerateRegression);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // Constant responses leave nothing to explain; report 0 rather than 0/0.
    let r_squared = if syy == 0.0 { 0.0 } else { 1.0 - ss_res / syy };
    Ok(RegressionResult {
        slope,
        intercept,
        r_squared,
        n,
    })
}

/// A regression tagged with its axes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaggedRegression {
    pub distance_metric: String,
    pub accuracy: AccuracyKind,
    #[serde(flatten)]
    pub fit: RegressionResult,
}

/// Dataset provenance embedded in a report; deliberately path-free so
/// identical runs in different directories emit identical reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportDatasetInfo {
    pub task: Task,
    pub n_rm: usize,
    pub ics_per_rule: usize,
    pub seed: u64,
    pub n_test: usize,
}

/// The machine-readable results file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub task: Task,
    /// Size of the training rule set distances were measured against.
    pub training_n_rm: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<ReportDatasetInfo>,
    pub summary: EvalSummary,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub regressions: Vec<TaggedRegression>,
}

/// Writes the results file, the per-sample table, and plot-ready columnar
/// files (aggregate bars, histogram bins, scatter points). Returns the paths
/// written.
pub fn emit_report(
    report: &EvalReport,
    records: &[EvalRecord],
    destination: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(destination)?;
    let mut written = Vec::new();

    let results_path = destination.join("results.json");
    std::fs::write(&results_path, serde_json::to_string_pretty(report)? + "\n")?;
    written.push(results_path);

    let table_path = destination.join("per_sample.csv");
    let mut table = std::io::BufWriter::new(std::fs::File::create(&table_path)?);
    writeln!(
        table,
        "index,rule_id,a_primary,a_irma,flag,d_hamming,d_jaccard,d_jsd"
    )?;
    let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17}"));
    for r in records {
        writeln!(
            table,
            "{},{},{:.17},{},{},{},{},{}",
            r.index,
            r.rule_id,
            r.a_primary,
            fmt_opt(r.a_irma),
            r.flag.map_or("", InverseFlag::name),
            fmt_opt(r.distances.map(|d| d.hamming)),
            fmt_opt(r.distances.map(|d| d.jaccard)),
            fmt_opt(r.distances.map(|d| d.jsd)),
        )?;
    }
    table.flush()?;
    written.push(table_path);

    let bars_path = destination.join("aggregates.csv");
    let mut bars = std::io::BufWriter::new(std::fs::File::create(&bars_path)?);
    writeln!(bars, "name,value")?;
    let primary_name = match report.task {
        Task::Forward => "mean_a_gs2i",
        Task::Inverse => "mean_a_rmi",
    };
    writeln!(bars, "{primary_name},{:.17}", report.summary.mean_primary)?;
    if let Some(m) = report.summary.mean_irma {
        writeln!(bars, "mean_a_irma,{m:.17}")?;
    }
    writeln!(bars, "f_p,{:.17}", report.summary.f_p)?;
    if let Some(fe) = report.summary.f_e {
        writeln!(bars, "f_e,{fe:.17}")?;
    }
    bars.flush()?;
    written.push(bars_path);

    let hist_sets: Vec<(&str, &Histogram)> = match report.task {
        Task::Forward => vec![("hist_a_gs2i.csv", &report.summary.histogram_primary)],
        Task::Inverse => {
            let mut v = vec![("hist_a_rmi.csv", &report.summary.histogram_primary)];
            if let Some(h) = &report.summary.histogram_irma {
                v.push(("hist_a_irma.csv", h));
            }
            v
        }
    };
    for (name, hist) in hist_sets {
        let path = destination.join(name);
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(out, "bin_lo,bin_hi,fraction")?;
        for (b, f) in hist.fractions.iter().enumerate() {
            writeln!(out, "{},{},{f:.17}", hist.edges[b], hist.edges[b + 1])?;
        }
        out.flush()?;
        written.push(path);
    }

    if report.task == Task::Inverse && records.iter().any(|r| r.distances.is_some()) {
        for metric in DistanceMetric::ALL {
            let path = destination.join(format!("scatter_{}.csv", metric.name()));
            let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
            writeln!(out, "distance,a_rmi,a_irma")?;
            for r in records {
                if let Some(d) = r.distances {
                    writeln!(
                        out,
                        "{:.17},{:.17},{}",
                        d.by_metric(metric),
                        r.a_primary,
                        fmt_opt(r.a_irma),
                    )?;
                }
            }
            out.flush()?;
            written.push(path);
        }
    }

    Ok(written)
}

/// Re-reads a per-sample table written by [`emit_report`].
pub fn read_per_sample_table(path: &Path) -> Result<Vec<EvalRecord>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fail = |reason: String| PipelineError::SampleParse {
            line: i + 1,
            reason,
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(fail(format!("expected 8 columns, got {}", cols.len())));
        }
        let opt_f = |s: &str| -> Option<f64> {
            if s.is_empty() {
                None
            } else {
                s.parse().ok()
            }
        };
        let distances = match (opt_f(cols[5]), opt_f(cols[6]), opt_f(cols[7])) {
            (Some(hamming), Some(jaccard), Some(jsd)) => Some(DistanceTriple {
                hamming,
                jaccard,
                jsd,
            }),
            _ => None,
        };
        records.push(EvalRecord {
            index: cols[0].parse().map_err(|e| fail(format!("bad index: {e}")))?,
            rule_id: cols[1].parse().map_err(|e| fail(format!("bad rule id: {e}")))?,
            a_primary: cols[2].parse().map_err(|e| fail(format!("bad accuracy: {e}")))?,
            a_irma: opt_f(cols[3]),
            flag: if cols[4].is_empty() {
                None
            } else {
                Some(cols[4].parse().map_err(|e| fail(format!("bad flag: {e}")))?)
            },
            distances,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use automata_core::{canonical_completion, infer_constraints, METASTATE_COUNT};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_grid(seed: u64) -> Grid {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let cells: Vec<u8> = (0..256).map(|_| rng.random_range(0..2u8)).collect();
        Grid::from_cells(16, 16, cells).unwrap()
    }

    fn random_rule(seed: u64) -> RulesMatrix {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut ns = [0u8; METASTATE_COUNT];
        for v in &mut ns {
            *v = rng.random_range(0..2);
        }
        RulesMatrix::from_next_states(ns).unwrap()
    }

    #[test]
    fn forward_scoring_reproduces_the_ratio() {
        let truth = random_grid(1);
        let exact: Vec<u8> = truth.cells().to_vec();
        assert_eq!(score_forward(&exact, &truth), 1.0);

        let complement: Vec<u8> = truth.cells().iter().map(|&c| 1 - c).collect();
        assert_eq!(score_forward(&complement, &truth), 0.0);

        // 192 of 256 correct.
        let mut partial = exact.clone();
        for v in partial.iter_mut().take(64) {
            *v = 1 - *v;
        }
        assert_eq!(score_forward(&partial, &truth), 0.75);
    }

    #[test]
    fn short_predictions_count_missing_positions_as_wrong() {
        let truth = Grid::default_size(); // all zero
        assert_eq!(score_forward(&[0u8; 128], &truth), 0.5);
        // Surplus predictions are ignored.
        assert_eq!(score_forward(&[0u8; 400], &truth), 1.0);
    }

    #[test]
    fn inverse_scoring_covers_every_branch() {
        let rm = random_rule(2);
        let ic = random_grid(3);
        let gs2 = step(&ic, &rm);

        // Perfect.
        let s = score_inverse(&rm.flatten(), &ic, &gs2, &rm);
        assert_eq!((s.a_rmi, s.a_irma, s.flag), (1.0, 1.0, InverseFlag::Perfect));

        // Degenerate perfect: another member of the consistent set.
        let constraints = infer_constraints(&ic, &gs2).unwrap();
        let degenerate = automata_core::consistent_rules(&constraints)
            .unwrap()
            .find(|c| *c != rm);
        if let Some(candidate) = degenerate {
            let s = score_inverse(&candidate.flatten(), &ic, &gs2, &rm);
            assert_eq!(
                (s.a_rmi, s.a_irma, s.flag),
                (1.0, 1.0, InverseFlag::DegeneratePerfect)
            );
        }

        // Illogical: a zero-sum column.
        let mut zeroed = rm.flatten();
        let one_pos = (0..36).find(|&i| zeroed[i] == 1).unwrap();
        zeroed[one_pos] = 0;
        let s = score_inverse(&zeroed, &ic, &gs2, &rm);
        assert_eq!((s.a_rmi, s.a_irma, s.flag), (0.0, 0.0, InverseFlag::Illogical));

        // Malformed: wrong length.
        let s = score_inverse(&rm.flatten()[..35], &ic, &gs2, &rm);
        assert_eq!((s.a_rmi, s.a_irma, s.flag), (0.0, 0.0, InverseFlag::Malformed));
    }

    #[test]
    fn imperfect_logical_rules_score_fractionally() {
        // Find a flipped column that actually changes GS2.
        let rm = random_rule(5);
        let ic = random_grid(6);
        let gs2 = step(&ic, &rm);
        for col in 0..18 {
            let mut ns = *rm.next_states();
            ns[col] ^= 1;
            let candidate = RulesMatrix::from_next_states(ns).unwrap();
            if step(&ic, &candidate) == gs2 {
                continue;
            }
            let s = score_inverse(&candidate.flatten(), &ic, &gs2, &rm);
            assert_eq!(s.flag, InverseFlag::Imperfect);
            // One flipped column changes two flattened tokens: 34/36 match.
            assert!((s.a_rmi - 34.0 / 36.0).abs() < 1e-15);
            assert!(s.a_irma < 1.0 && s.a_irma > 0.0);
            return;
        }
        panic!("no behavior-changing column flip found");
    }

    #[test]
    fn oracle_completions_never_err() {
        // Scoring the canonical completion over constructed pairs yields
        // f_e = 0 and A_IRMA = 1 on every sample.
        let mut records = Vec::new();
        for i in 0..50 {
            let rm = random_rule(100 + i);
            let ic = random_grid(200 + i);
            let gs2 = step(&ic, &rm);
            let constraints = infer_constraints(&ic, &gs2).unwrap();
            let inferred = canonical_completion(&constraints);
            let s = score_inverse(&inferred.flatten(), &ic, &gs2, &rm);
            assert_eq!(s.a_irma, 1.0);
            records.push(EvalRecord {
                index: i as usize,
                rule_id: rm.id().value(),
                a_primary: s.a_rmi,
                a_irma: Some(s.a_irma),
                flag: Some(s.flag),
                distances: None,
            });
        }
        let summary = aggregate(&records, &default_bin_edges()).unwrap();
        assert_eq!(summary.f_e, Some(0.0));
        assert_eq!(summary.mean_irma, Some(1.0));
    }

    #[test]
    fn aggregation_matches_hand_arithmetic() {
        let rec = |a: f64| EvalRecord {
            index: 0,
            rule_id: 0,
            a_primary: a,
            a_irma: None,
            flag: None,
            distances: None,
        };
        let records = vec![rec(1.0), rec(0.5), rec(0.0)];
        let summary = aggregate(&records, &default_bin_edges()).unwrap();
        assert_eq!(summary.mean_primary, 0.5);
        assert!((summary.f_p - 1.0 / 3.0).abs() < 1e-15);
        let total: f64 = summary.histogram_primary.fractions.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);

        let perfect = vec![rec(1.0), rec(1.0)];
        let summary = aggregate(&perfect, &default_bin_edges()).unwrap();
        assert_eq!(summary.mean_primary, 1.0);
        assert_eq!(summary.f_p, 1.0);

        assert!(matches!(
            aggregate(&[], &default_bin_edges()),
            Err(PipelineError::EmptyRecords)
        ));
    }

    #[test]
    fn aggregation_is_permutation_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let mut records: Vec<EvalRecord> = (0..100)
            .map(|i| EvalRecord {
                index: i,
                rule_id: i as u32,
                a_primary: rng.random(),
                a_irma: None,
                flag: None,
                distances: None,
            })
            .collect();
        let before = aggregate(&records, &default_bin_edges()).unwrap();
        records.reverse();
        let after = aggregate(&records, &default_bin_edges()).unwrap();
        assert_eq!(before.mean_primary, after.mean_primary);
        assert_eq!(before.f_p, after.f_p);
        assert_eq!(before.histogram_primary.fractions, after.histogram_primary.fractions);
    }

    #[test]
    fn exact_line_fits_perfectly() {
        let points: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let x = f64::from(i);
                (x, 0.5 - 0.1 * x)
            })
            .collect();
        let fit = ols(&points).unwrap();
        assert!((fit.slope + 0.1).abs() < 1e-10);
        assert!((fit.intercept - 0.5).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_accuracy_has_zero_slope_and_r2() {
        let points: Vec<(f64, f64)> = (0..10).map(|i| (f64::from(i), 0.5)).collect();
        let fit = ols(&points).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn regression_error_paths() {
        assert!(matches!(
            ols(&[(0.0, 0.0), (1.0, 1.0)]),
            Err(PipelineError::InsufficientData { got: 2 })
        ));
        assert!(matches!(
            ols(&[(2.0, 0.1), (2.0, 0.5), (2.0, 0.9)]),
            Err(PipelineError::DegenerateRegression)
        ));
    }

    #[test]
    fn extreme_accuracies_are_excluded_from_fits() {
        let mk = |a: f64, d: f64| EvalRecord {
            index: 0,
            rule_id: 0,
            a_primary: a,
            a_irma: Some(a),
            flag: Some(InverseFlag::Imperfect),
            distances: Some(DistanceTriple {
                hamming: d,
                jaccard: d / 36.0,
                jsd: d / 36.0,
            }),
        };
        let records = vec![
            mk(0.0, 1.0),
            mk(1.0, 2.0),
            mk(0.4, 4.0),
            mk(0.5, 8.0),
            mk(0.6, 12.0),
            mk(1.0, 16.0),
        ];
        let fit =
            regress_accuracy_vs_distance(&records, DistanceMetric::Hamming, AccuracyKind::Rmi)
                .unwrap();
        assert_eq!(fit.n, 3, "points at 0 and 1 must be excluded");
    }

    #[test]
    fn report_emission_round_trips_the_table() {
        let dir = tempfile::tempdir().unwrap();
        let records: Vec<EvalRecord> = (0..20)
            .map(|i| EvalRecord {
                index: i,
                rule_id: i as u32 * 7,
                a_primary: f64::from(i as u32) / 19.0,
                a_irma: Some(f64::from(i as u32 % 5) / 4.0),
                flag: Some(InverseFlag::Imperfect),
                distances: Some(DistanceTriple {
                    hamming: f64::from(i as u32),
                    jaccard: f64::from(i as u32) / 36.0,
                    jsd: f64::from(i as u32) / 40.0,
                }),
            })
            .collect();
        let summary = aggregate(&records, &default_bin_edges()).unwrap();
        let report = EvalReport {
            model_name: "test".into(),
            task: Task::Inverse,
            training_n_rm: 2,
            dataset: None,
            summary: summary.clone(),
            regressions: Vec::new(),
        };
        let written = emit_report(&report, &records, dir.path()).unwrap();
        assert!(written.iter().any(|p| p.ends_with("results.json")));

        let back = read_per_sample_table(&dir.path().join("per_sample.csv")).unwrap();
        assert_eq!(back.len(), records.len());
        let again = aggregate(&back, &default_bin_edges()).unwrap();
        assert_eq!(again.mean_primary, summary.mean_primary);
        assert_eq!(again.mean_irma, summary.mean_irma);
        assert_eq!(again.f_p, summary.f_p);

        // Empty regression list: results file still valid JSON without the key.
        let text = std::fs::read_to_string(dir.path().join("results.json")).unwrap();
        assert!(!text.contains("regressions"));
    }
}
