//! Rule-set generation and pairwise dissimilarity metrics.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::CoreError;
use crate::grid::METASTATE_COUNT;
use crate::rules::{rule_space_size, RuleId, RulesMatrix, RULE_FLAT_LEN};

/// Dissimilarity metric selector for rule comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMetric {
    Hamming,
    Jaccard,
    Jsd,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 3] = [
        DistanceMetric::Hamming,
        DistanceMetric::Jaccard,
        DistanceMetric::Jsd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceMetric::Hamming => "hamming",
            DistanceMetric::Jaccard => "jaccard",
            DistanceMetric::Jsd => "jsd",
        }
    }
}

impl std::str::FromStr for DistanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hamming" => Ok(DistanceMetric::Hamming),
            "jaccard" => Ok(DistanceMetric::Jaccard),
            "jsd" => Ok(DistanceMetric::Jsd),
            other => Err(format!("unknown distance metric '{other}'")),
        }
    }
}

/// All three dissimilarities between a pair of rules matrices.
///
/// Hamming counts differing flattened entries (raw, in [0, 36] and always
/// even for valid deterministic rules). Jaccard is set dissimilarity over the
/// flattened positions holding 1. JSD is the per-column Jensen-Shannon
/// divergence in bits (base-2), averaged over the 18 columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleDistance {
    pub hamming: u32,
    pub jaccard: f64,
    pub jsd: f64,
}

impl RuleDistance {
    pub fn by_metric(&self, metric: DistanceMetric) -> f64 {
        match metric {
            DistanceMetric::Hamming => f64::from(self.hamming),
            DistanceMetric::Jaccard => self.jaccard,
            DistanceMetric::Jsd => self.jsd,
        }
    }
}

/// Computes all three dissimilarities between two rules matrices.
pub fn distance(a: &RulesMatrix, b: &RulesMatrix) -> RuleDistance {
    let fa = a.flatten();
    let fb = b.flatten();

    let mut hamming = 0u32;
    let mut intersection = 0u32;
    let mut union = 0u32;
    for (&x, &y) in fa.iter().zip(fb.iter()) {
        if x != y {
            hamming += 1;
        }
        if x == 1 && y == 1 {
            intersection += 1;
        }
        if x == 1 || y == 1 {
            union += 1;
        }
    }
    // Valid rules always have 18 ones so the union is never empty.
    let jaccard = if union == 0 {
        0.0
    } else {
        1.0 - f64::from(intersection) / f64::from(union)
    };

    let mut jsd_sum = 0.0;
    for col in 0..METASTATE_COUNT {
        let p = [f64::from(fa[col]), f64::from(fa[METASTATE_COUNT + col])];
        let q = [f64::from(fb[col]), f64::from(fb[METASTATE_COUNT + col])];
        jsd_sum += jensen_shannon_bits(&p, &q);
    }

    RuleDistance {
        hamming,
        jaccard,
        jsd: jsd_sum / METASTATE_COUNT as f64,
    }
}

/// Jensen-Shannon divergence between two discrete distributions, in bits.
fn jensen_shannon_bits(p: &[f64], q: &[f64]) -> f64 {
    fn kl_bits(p: &[f64], m: &[f64]) -> f64 {
        p.iter()
            .zip(m.iter())
            .filter(|(&pi, _)| pi > 0.0)
            .map(|(&pi, &mi)| pi * (pi / mi).log2())
            .sum()
    }
    let m: Vec<f64> = p.iter().zip(q.iter()).map(|(&x, &y)| 0.5 * (x + y)).collect();
    0.5 * kl_bits(p, &m) + 0.5 * kl_bits(q, &m)
}

/// A set of pairwise-distinct rules matrices used to train one model.
#[derive(Clone, Debug)]
pub struct TrainingRuleSet {
    rules: Vec<RulesMatrix>,
}

impl TrainingRuleSet {
    /// Draws `count` distinct rules, each column's next state uniform at
    /// random; duplicates are rejected and redrawn. Reproducible per seed.
    pub fn generate(count: usize, seed: u64) -> Result<Self, CoreError> {
        Self::generate_excluding(count, seed, &HashSet::new())
    }

    /// Like [`TrainingRuleSet::generate`] but also redraws any rule whose id
    /// appears in `excluded` (used to keep test rules disjoint from training
    /// rules).
    pub fn generate_excluding(
        count: usize,
        seed: u64,
        excluded: &HashSet<RuleId>,
    ) -> Result<Self, CoreError> {
        let capacity = rule_space_size() - excluded.len() as u64;
        if count as u64 > capacity {
            return Err(CoreError::RuleCapacityExceeded {
                requested: count as u64,
                capacity,
            });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut seen: HashSet<RuleId> = HashSet::with_capacity(count);
        let mut rules = Vec::with_capacity(count);
        while rules.len() < count {
            let bits: u32 = rng.random_range(0..rule_space_size() as u32);
            let id = RuleId::new(bits).expect("draw is within the rule space");
            if excluded.contains(&id) || !seen.insert(id) {
                continue;
            }
            rules.push(id.decode());
        }
        Ok(Self { rules })
    }

    /// Wraps an explicit rule list, rejecting duplicates.
    pub fn from_rules(rules: Vec<RulesMatrix>) -> Result<Self, CoreError> {
        let mut seen = HashSet::with_capacity(rules.len());
        for rm in &rules {
            if !seen.insert(rm.id()) {
                return Err(CoreError::DuplicateRule { id: rm.id().value() });
            }
        }
        Ok(Self { rules })
    }

    pub fn rules(&self) -> &[RulesMatrix] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn ids(&self) -> HashSet<RuleId> {
        self.rules.iter().map(|rm| rm.id()).collect()
    }

    /// Writes the rule-set file: one line per rule, the decimal rule id, a
    /// tab, then 36 space-delimited row-major entries.
    pub fn write_to(&self, path: &Path) -> Result<(), CoreError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for rm in &self.rules {
            let flat = rm.flatten();
            let entries: Vec<String> = flat.iter().map(|e| e.to_string()).collect();
            writeln!(out, "{}\t{}", rm.id().value(), entries.join(" "))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a rule-set file written by [`TrainingRuleSet::write_to`],
    /// validating ids against entries.
    pub fn read_from(path: &Path) -> Result<Self, CoreError> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut rules = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |reason: String| CoreError::RuleSetParse {
                line: lineno + 1,
                reason,
            };
            let (id_part, entries_part) = line
                .split_once('\t')
                .ok_or_else(|| parse("missing tab between id and entries".into()))?;
            let id: u32 = id_part
                .parse()
                .map_err(|e| parse(format!("bad rule id '{id_part}': {e}")))?;
            let mut flat = Vec::with_capacity(RULE_FLAT_LEN);
            for tok in entries_part.split_whitespace() {
                let v: u8 = tok
                    .parse()
                    .map_err(|e| parse(format!("bad entry '{tok}': {e}")))?;
                flat.push(v);
            }
            let rm = RulesMatrix::from_flat(&flat)
                .map_err(|e| parse(format!("invalid rules matrix: {e}")))?;
            if rm.id().value() != id {
                return Err(parse(format!(
                    "declared id {id} does not match entries (canonical id {})",
                    rm.id().value()
                )));
            }
            rules.push(rm);
        }
        Self::from_rules(rules)
    }
}

/// Mean of the two smallest distances from `query` to members of `trainset`
/// under the chosen metric (multiset semantics on ties).
pub fn mean_nearest_distance(
    query: &RulesMatrix,
    trainset: &TrainingRuleSet,
    metric: DistanceMetric,
) -> Result<f64, CoreError> {
    if trainset.len() < 2 {
        return Err(CoreError::InsufficientReferences { got: trainset.len() });
    }
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    for rm in trainset.rules() {
        let d = distance(query, rm).by_metric(metric);
        if d < best {
            second = best;
            best = d;
        } else if d < second {
            second = d;
        }
    }
    Ok(0.5 * (best + second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complement(rm: &RulesMatrix) -> RulesMatrix {
        let mut flipped = *rm.next_states();
        for v in &mut flipped {
            *v ^= 1;
        }
        RulesMatrix::from_next_states(flipped).unwrap()
    }

    #[test]
    fn identical_rules_are_at_distance_zero() {
        let rm = RulesMatrix::game_of_life();
        let d = distance(&rm, &rm);
        assert_eq!(d.hamming, 0);
        assert_eq!(d.jaccard, 0.0);
        assert_eq!(d.jsd, 0.0);
    }

    #[test]
    fn one_column_difference_fixture() {
        let a = RulesMatrix::game_of_life();
        let mut ns = *a.next_states();
        ns[0] ^= 1;
        let b = RulesMatrix::from_next_states(ns).unwrap();
        let d = distance(&a, &b);
        assert_eq!(d.hamming, 2);
        assert!((d.jaccard - 2.0 / 19.0).abs() < 1e-12);
        assert!((d.jsd - 1.0 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn complement_fixture() {
        let a = RulesMatrix::game_of_life();
        let b = complement(&a);
        let d = distance(&a, &b);
        assert_eq!(d.hamming, 36);
        assert!((d.jaccard - 1.0).abs() < 1e-12);
        assert!((d.jsd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generation_is_seeded_and_distinct() {
        let a = TrainingRuleSet::generate(100, 42).unwrap();
        let b = TrainingRuleSet::generate(100, 42).unwrap();
        assert_eq!(a.len(), 100);
        for (x, y) in a.rules().iter().zip(b.rules()) {
            assert_eq!(x, y);
        }
        assert_eq!(a.ids().len(), 100);

        let c = TrainingRuleSet::generate(1, 7).unwrap();
        let d = TrainingRuleSet::generate(1, 7).unwrap();
        assert_eq!(c.rules()[0], d.rules()[0]);
    }

    #[test]
    fn over_capacity_requests_fail() {
        let err = TrainingRuleSet::generate(1 << 19, 0).unwrap_err();
        assert!(matches!(err, CoreError::RuleCapacityExceeded { .. }));
    }

    #[test]
    fn hundred_rules_cover_the_documented_fraction() {
        let fraction = 100.0 / rule_space_size() as f64;
        assert!((fraction * 100.0 - 0.03814).abs() < 5e-5);
    }

    #[test]
    fn exclusion_redraws_conflicting_ids() {
        let train = TrainingRuleSet::generate(50, 1).unwrap();
        let test = TrainingRuleSet::generate_excluding(50, 1, &train.ids()).unwrap();
        assert!(test.ids().is_disjoint(&train.ids()));
    }

    #[test]
    fn nearest_two_distances_average() {
        let query = RulesMatrix::game_of_life();
        let mut one_flip = *query.next_states();
        one_flip[0] ^= 1;
        let near = RulesMatrix::from_next_states(one_flip).unwrap();
        let far = complement(&query);
        let set = TrainingRuleSet::from_rules(vec![far, near]).unwrap();
        let mean = mean_nearest_distance(&query, &set, DistanceMetric::Hamming).unwrap();
        assert_eq!(mean, (2.0 + 36.0) / 2.0);

        let singleton = TrainingRuleSet::from_rules(vec![near]).unwrap();
        assert!(matches!(
            mean_nearest_distance(&query, &singleton, DistanceMetric::Hamming),
            Err(CoreError::InsufficientReferences { got: 1 })
        ));
    }

    #[test]
    fn membership_contributes_a_zero_distance() {
        let set = TrainingRuleSet::generate(5, 3).unwrap();
        let query = set.rules()[2];
        let mut ds: Vec<f64> = set
            .rules()
            .iter()
            .map(|rm| distance(&query, rm).by_metric(DistanceMetric::Hamming))
            .collect();
        ds.sort_by(f64::total_cmp);
        let expected = 0.5 * (ds[0] + ds[1]);
        assert_eq!(ds[0], 0.0);
        let got = mean_nearest_distance(&query, &set, DistanceMetric::Hamming).unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn rule_set_file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.tsv");
        let set = TrainingRuleSet::generate(10, 99).unwrap();
        set.write_to(&path).unwrap();
        let back = TrainingRuleSet::read_from(&path).unwrap();
        assert_eq!(back.len(), 10);
        for (a, b) in set.rules().iter().zip(back.rules()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rule_set_parse_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.tsv");
        std::fs::write(&path, "123 no tab here\n").unwrap();
        match TrainingRuleSet::read_from(&path) {
            Err(CoreError::RuleSetParse { line: 1, .. }) => {}
            other => panic!("expected parse error on line 1, got {other:?}"),
        }
    }
}
