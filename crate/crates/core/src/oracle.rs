//! Exact inverse-problem solver: recover every deterministic rule consistent
//! with an observed one-step (IC, GS2) transition.
//!
//! Each cell of the pair pins the rule column for that cell's metastate;
//! metastates absent from the IC leave their columns free, giving
//! `2^(free columns)` consistent rules.

use crate::error::CoreError;
use crate::grid::{Grid, Metastate, METASTATE_COUNT};
use crate::rules::{RulesMatrix, RULE_FLAT_LEN};

/// Default enumeration cap: covers the all-zero-IC degeneracy of 2^17 while
/// bounding memory on adversarial requests.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

/// Per-column constraints extracted from an observed transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnConstraints {
    /// forced[col] is Some(next state) when metastate col+1 occurs in the IC.
    forced: [Option<u8>; METASTATE_COUNT],
}

impl ColumnConstraints {
    /// Columns pinned by the observation.
    pub fn observed_count(&self) -> usize {
        self.forced.iter().filter(|f| f.is_some()).count()
    }

    /// Columns left free by the observation.
    pub fn free_count(&self) -> usize {
        METASTATE_COUNT - self.observed_count()
    }

    /// The forced next state for a metastate, if observed.
    pub fn forced(&self, metastate: Metastate) -> Option<u8> {
        self.forced[metastate.column()]
    }

    /// Number of distinct rules consistent with the observation:
    /// 2^(free columns).
    pub fn degeneracy(&self) -> u64 {
        1u64 << self.free_count()
    }

    /// True when the rule satisfies every forced column.
    pub fn admits(&self, rm: &RulesMatrix) -> bool {
        self.forced
            .iter()
            .zip(rm.next_states())
            .all(|(forced, &ns)| forced.is_none_or(|f| f == ns))
    }
}

/// Scans every cell of the pair and aggregates forced next states per
/// metastate column. Two cells sharing a metastate but disagreeing on the
/// next state mean the pair was not produced by any deterministic rule.
pub fn infer_constraints(ic: &Grid, gs2: &Grid) -> Result<ColumnConstraints, CoreError> {
    if ic.width() != gs2.width() || ic.height() != gs2.height() {
        return Err(CoreError::DimensionMismatch {
            a_width: ic.width(),
            a_height: ic.height(),
            b_width: gs2.width(),
            b_height: gs2.height(),
        });
    }
    let mut forced = [None; METASTATE_COUNT];
    for row in 0..ic.height() {
        for col in 0..ic.width() {
            let meta = Metastate::from_parts(ic.at(row, col), ic.live_neighbors(row, col));
            let next = gs2.at(row, col);
            match forced[meta.column()] {
                None => forced[meta.column()] = Some(next),
                Some(prev) if prev != next => {
                    return Err(CoreError::InconsistentPair {
                        metastate: meta.index(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    Ok(ColumnConstraints { forced })
}

/// Lazy enumeration of every rule satisfying the constraints, under the
/// default cap of 2^20.
pub fn consistent_rules(
    constraints: &ColumnConstraints,
) -> Result<ConsistentRules, CoreError> {
    consistent_rules_capped(constraints, DEFAULT_ENUMERATION_CAP)
}

/// Lazy enumeration with an explicit cap. When the consistent set is larger
/// than the cap the exact count is still reported in the error.
pub fn consistent_rules_capped(
    constraints: &ColumnConstraints,
    cap: u64,
) -> Result<ConsistentRules, CoreError> {
    let count = constraints.degeneracy();
    if count > cap {
        return Err(CoreError::EnumerationCapExceeded { count, cap });
    }
    let mut base = [0u8; METASTATE_COUNT];
    let mut free_columns = Vec::new();
    for (col, forced) in constraints.forced.iter().enumerate() {
        match forced {
            Some(ns) => base[col] = *ns,
            None => free_columns.push(col),
        }
    }
    Ok(ConsistentRules {
        base,
        free_columns,
        next: 0,
        total: count,
    })
}

/// Iterator over the completions of a constraint set. Free columns are
/// filled from the bits of a counter, so the order is deterministic.
#[derive(Debug)]
pub struct ConsistentRules {
    base: [u8; METASTATE_COUNT],
    free_columns: Vec<usize>,
    next: u64,
    total: u64,
}

impl ConsistentRules {
    /// Exact size of the consistent set.
    pub fn total(&self) -> u64 {
        self.total
    }
}

impl Iterator for ConsistentRules {
    type Item = RulesMatrix;

    fn next(&mut self) -> Option<RulesMatrix> {
        if self.next >= self.total {
            return None;
        }
        let mut next_states = self.base;
        for (bit, &col) in self.free_columns.iter().enumerate() {
            next_states[col] = ((self.next >> bit) & 1) as u8;
        }
        self.next += 1;
        Some(RulesMatrix::from_next_states(next_states).expect("completion entries are binary"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = (self.total - self.next) as usize;
        (remaining, Some(remaining))
    }
}

impl ExactSizeIterator for ConsistentRules {}

/// Outcome of checking a candidate 2x18 array for rule validity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RmValidity {
    Logical(RulesMatrix),
    Illogical,
}

impl RmValidity {
    pub fn is_logical(&self) -> bool {
        matches!(self, RmValidity::Logical(_))
    }
}

/// Total validity check on a flattened row-major candidate: logical iff the
/// length is 36, every entry is 0 or 1, and every column sums to exactly 1.
pub fn validate_rm(flat: &[u8]) -> RmValidity {
    if flat.len() != RULE_FLAT_LEN {
        return RmValidity::Illogical;
    }
    match RulesMatrix::from_flat(flat) {
        Ok(rm) => RmValidity::Logical(rm),
        Err(_) => RmValidity::Illogical,
    }
}

/// The unique completion assigning next-state 0 to every free column; a
/// deterministic tie-break for reporting, not a claim about likely dynamics.
pub fn canonical_completion(constraints: &ColumnConstraints) -> RulesMatrix {
    let mut next_states = [0u8; METASTATE_COUNT];
    for (col, forced) in constraints.forced.iter().enumerate() {
        if let Some(ns) = forced {
            next_states[col] = *ns;
        }
    }
    RulesMatrix::from_next_states(next_states).expect("completion entries are binary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::step;
    use crate::rulespace::TrainingRuleSet;

    #[test]
    fn all_zero_pair_has_degeneracy_2_to_17() {
        let ic = Grid::default_size();
        let gs2 = Grid::default_size();
        let constraints = infer_constraints(&ic, &gs2).unwrap();
        assert_eq!(constraints.observed_count(), 1);
        assert_eq!(constraints.degeneracy(), 1 << 17);
    }

    #[test]
    fn constructed_pairs_admit_their_rule() {
        let rules = TrainingRuleSet::generate(20, 5).unwrap();
        for (i, rm) in rules.rules().iter().enumerate() {
            let ic = random_grid(i as u64);
            let gs2 = step(&ic, rm);
            let constraints = infer_constraints(&ic, &gs2).unwrap();
            assert!(constraints.admits(rm));
        }
    }

    #[test]
    fn inconsistent_pairs_are_detected() {
        // Two dead cells with no live neighbors share metastate 1 but are
        // sent to different next states.
        let ic = Grid::default_size();
        let mut gs2 = Grid::default_size();
        gs2.set(0, 0, 1).unwrap();
        let err = infer_constraints(&ic, &gs2).unwrap_err();
        assert!(matches!(err, CoreError::InconsistentPair { metastate: 1 }));
    }

    #[test]
    fn enumeration_matches_degeneracy_and_reproduces_gs2() {
        let rm = RulesMatrix::game_of_life();
        // Dense-ish IC leaving a small number of free columns.
        let ic = random_grid(11);
        let gs2 = step(&ic, &rm);
        let constraints = infer_constraints(&ic, &gs2).unwrap();
        let iter = consistent_rules(&constraints).unwrap();
        assert_eq!(iter.total(), constraints.degeneracy());
        let mut saw_ground_truth = false;
        let mut n = 0u64;
        for candidate in iter.take(2048) {
            assert_eq!(step(&ic, &candidate), gs2);
            if candidate == rm {
                saw_ground_truth = true;
            }
            n += 1;
        }
        assert_eq!(n, constraints.degeneracy().min(2048));
        if constraints.degeneracy() <= 2048 {
            assert!(saw_ground_truth);
        }
    }

    #[test]
    fn cap_errors_still_report_the_exact_count() {
        let ic = Grid::default_size();
        let gs2 = Grid::default_size();
        let constraints = infer_constraints(&ic, &gs2).unwrap();
        match consistent_rules_capped(&constraints, 1024) {
            Err(CoreError::EnumerationCapExceeded { count, cap: 1024 }) => {
                assert_eq!(count, 1 << 17);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn validity_checks_are_total() {
        assert!(validate_rm(&RulesMatrix::game_of_life().flatten()).is_logical());
        assert_eq!(validate_rm(&[0u8; 36]), RmValidity::Illogical); // zero columns
        let mut double = [0u8; 36];
        double[0] = 1;
        double[18] = 1; // column 1 sums to 2
        double[1] = 1;
        for col in 2..18 {
            double[col] = 1;
        }
        assert_eq!(validate_rm(&double), RmValidity::Illogical);
        assert_eq!(validate_rm(&[1u8; 35]), RmValidity::Illogical); // wrong length
    }

    #[test]
    fn canonical_completion_zeroes_free_columns() {
        let ic = Grid::default_size();
        let gs2 = Grid::default_size();
        let constraints = infer_constraints(&ic, &gs2).unwrap();
        let rm = canonical_completion(&constraints);
        assert_eq!(rm.next_states(), &[0u8; METASTATE_COUNT]);
        assert!(validate_rm(&rm.flatten()).is_logical());
        assert_eq!(step(&ic, &rm), gs2);
    }

    fn random_grid(seed: u64) -> Grid {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let cells: Vec<u8> = (0..256).map(|_| rng.random_range(0..2u8)).collect();
        Grid::from_cells(16, 16, cells).unwrap()
    }
}
