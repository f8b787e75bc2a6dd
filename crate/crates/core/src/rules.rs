use crate::error::CoreError;
use crate::grid::{Metastate, METASTATE_COUNT};

/// Flattened length of a rules matrix: 2 rows x 18 metastate columns.
pub const RULE_FLAT_LEN: usize = 2 * METASTATE_COUNT;

/// Total number of distinct deterministic rules matrices: 2^18.
pub fn rule_space_size() -> u64 {
    1 << METASTATE_COUNT
}

/// A deterministic state-transition rule as a 2x18 binary adjacency matrix.
///
/// Row index is the next state, column index the metastate. Every column
/// holds exactly one 1, so each metastate maps to a single next state.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RulesMatrix {
    /// next_states[column] is the row holding the 1 in that column.
    next_states: [u8; METASTATE_COUNT],
}

impl RulesMatrix {
    /// Builds from the per-column next states. Always valid since one-hot
    /// columns are implied.
    pub fn from_next_states(next_states: [u8; METASTATE_COUNT]) -> Result<Self, CoreError> {
        if let Some(&bad) = next_states.iter().find(|&&v| v > 1) {
            return Err(CoreError::NonBinaryCell { value: bad });
        }
        Ok(Self { next_states })
    }

    /// Builds from explicit 2x18 rows, validating that every entry is binary
    /// and every column sums to exactly 1.
    pub fn from_rows(rows: [[u8; METASTATE_COUNT]; 2]) -> Result<Self, CoreError> {
        let mut next_states = [0u8; METASTATE_COUNT];
        for col in 0..METASTATE_COUNT {
            let (a, b) = (rows[0][col], rows[1][col]);
            if a > 1 {
                return Err(CoreError::NonBinaryCell { value: a });
            }
            if b > 1 {
                return Err(CoreError::NonBinaryCell { value: b });
            }
            let sum = u32::from(a) + u32::from(b);
            if sum != 1 {
                return Err(CoreError::InvalidRuleColumn { column: col + 1, sum });
            }
            next_states[col] = b; // row 1 set means next state 1
        }
        Ok(Self { next_states })
    }

    /// Builds from the 36-entry row-major flattening (row 0 first).
    pub fn from_flat(flat: &[u8]) -> Result<Self, CoreError> {
        if flat.len() != RULE_FLAT_LEN {
            return Err(CoreError::RuleLengthMismatch {
                expected: RULE_FLAT_LEN,
                got: flat.len(),
            });
        }
        let mut rows = [[0u8; METASTATE_COUNT]; 2];
        rows[0].copy_from_slice(&flat[..METASTATE_COUNT]);
        rows[1].copy_from_slice(&flat[METASTATE_COUNT..]);
        Self::from_rows(rows)
    }

    /// Next state assigned to the given metastate.
    #[inline]
    pub fn next_state(&self, metastate: Metastate) -> u8 {
        self.next_states[metastate.column()]
    }

    /// Per-column next states, indexed by 0-based column.
    pub fn next_states(&self) -> &[u8; METASTATE_COUNT] {
        &self.next_states
    }

    /// Row-major 36-entry flattening, next-state-0 row first.
    pub fn flatten(&self) -> [u8; RULE_FLAT_LEN] {
        let mut flat = [0u8; RULE_FLAT_LEN];
        for (col, &ns) in self.next_states.iter().enumerate() {
            flat[usize::from(ns) * METASTATE_COUNT + col] = 1;
        }
        flat
    }

    /// Canonical integer id of this rule.
    pub fn id(&self) -> RuleId {
        let mut id = 0u32;
        for (col, &ns) in self.next_states.iter().enumerate() {
            id |= u32::from(ns) << col;
        }
        RuleId(id)
    }

    /// Conway's Game of Life (B3/S23) in rules-matrix form: a dead cell is
    /// born with exactly 3 live neighbors (metastate 4) and a live cell
    /// survives with 2 or 3 (metastates 12 and 13).
    pub fn game_of_life() -> Self {
        let mut next_states = [0u8; METASTATE_COUNT];
        next_states[3] = 1; // metastate 4
        next_states[11] = 1; // metastate 12
        next_states[12] = 1; // metastate 13
        Self { next_states }
    }
}

impl std::fmt::Debug for RulesMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RulesMatrix(id={}, next_states={:?})", self.id().value(), self.next_states)
    }
}

/// Canonical integer label of a rules matrix.
///
/// Bit `j` (j = 0..17) of the id is the next state assigned to metastate
/// `j + 1`, making the id a bijection with the rule space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(u32);

impl RuleId {
    pub fn new(id: u32) -> Result<Self, CoreError> {
        if u64::from(id) < rule_space_size() {
            Ok(Self(id))
        } else {
            Err(CoreError::RuleIdOutOfRange { id: u64::from(id) })
        }
    }

    pub fn value(self) -> u32 {
        self.0
    }

    /// Decodes the id back into its rules matrix.
    pub fn decode(self) -> RulesMatrix {
        let mut next_states = [0u8; METASTATE_COUNT];
        for (col, slot) in next_states.iter_mut().enumerate() {
            *slot = ((self.0 >> col) & 1) as u8;
        }
        RulesMatrix { next_states }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_space_holds_2_to_the_18() {
        assert_eq!(rule_space_size(), 262_144);
        assert_eq!(rule_space_size(), 1u64 << METASTATE_COUNT);
    }

    #[test]
    fn columns_must_sum_to_one() {
        let mut rows = [[0u8; METASTATE_COUNT]; 2];
        rows[0] = [1; METASTATE_COUNT];
        rows[1][4] = 1; // column 5 sums to 2
        assert!(matches!(
            RulesMatrix::from_rows(rows),
            Err(CoreError::InvalidRuleColumn { column: 5, sum: 2 })
        ));

        let zero_col = [[0u8; METASTATE_COUNT]; 2];
        assert!(matches!(
            RulesMatrix::from_rows(zero_col),
            Err(CoreError::InvalidRuleColumn { column: 1, sum: 0 })
        ));
    }

    #[test]
    fn flatten_is_row_major_one_hot() {
        let rm = RulesMatrix::game_of_life();
        let flat = rm.flatten();
        assert_eq!(flat.len(), RULE_FLAT_LEN);
        // column sums are 1
        for col in 0..METASTATE_COUNT {
            assert_eq!(flat[col] + flat[METASTATE_COUNT + col], 1);
        }
        // metastate 4 maps to 1: row-1 entry set, row-0 entry clear
        assert_eq!(flat[METASTATE_COUNT + 3], 1);
        assert_eq!(flat[3], 0);
        let back = RulesMatrix::from_flat(&flat).unwrap();
        assert_eq!(back, rm);
    }

    #[test]
    fn life_has_its_canonical_id() {
        // bits 3, 11, 12 set
        assert_eq!(RulesMatrix::game_of_life().id().value(), (1 << 3) | (1 << 11) | (1 << 12));
    }

    #[test]
    fn id_decode_round_trips_exhaustively() {
        for id in 0..rule_space_size() as u32 {
            let rm = RuleId::new(id).unwrap().decode();
            assert_eq!(rm.id().value(), id);
        }
    }

    #[test]
    fn ids_at_or_above_capacity_are_rejected() {
        assert!(RuleId::new((1 << 18) - 1).is_ok());
        assert!(matches!(
            RuleId::new(1 << 18),
            Err(CoreError::RuleIdOutOfRange { .. })
        ));
    }
}
