use thiserror::Error;

/// Errors surfaced by grid construction, rule validation, rule-space
/// operations, and the inverse-problem solver.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("cell ({row}, {col}) is out of bounds for a {width}x{height} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },

    #[error("grid dimensions {width}x{height} are too small; the 3x3 neighborhood needs at least 3x3")]
    GridTooSmall { width: usize, height: usize },

    #[error("grid expects {expected} cells, got {got}")]
    CellCountMismatch { expected: usize, got: usize },

    #[error("cell value {value} is not binary")]
    NonBinaryCell { value: u8 },

    #[error("metastate index {index} is outside [1, 18]")]
    MetastateOutOfRange { index: u8 },

    #[error("rules matrix column {column} sums to {sum}; a deterministic rule needs exactly 1")]
    InvalidRuleColumn { column: usize, sum: u32 },

    #[error("rules matrix expects {expected} entries, got {got}")]
    RuleLengthMismatch { expected: usize, got: usize },

    #[error("rule id {id} exceeds the rule space (must be < 2^18)")]
    RuleIdOutOfRange { id: u64 },

    #[error("requested {requested} distinct rules but the rule space holds only {capacity}")]
    RuleCapacityExceeded { requested: u64, capacity: u64 },

    #[error("duplicate rule id {id} in rule set")]
    DuplicateRule { id: u32 },

    #[error("nearest-distance query needs at least 2 reference rules, got {got}")]
    InsufficientReferences { got: usize },

    #[error("grids have mismatched dimensions: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: usize,
        a_height: usize,
        b_width: usize,
        b_height: usize,
    },

    #[error(
        "metastate {metastate} maps to both 0 and 1 across the pair; \
         no deterministic rule produces this transition"
    )]
    InconsistentPair { metastate: u8 },

    #[error("enumerating {count} consistent rules exceeds the cap of {cap}")]
    EnumerationCapExceeded { count: u64, cap: u64 },

    #[error("rule set line {line}: {reason}")]
    RuleSetParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
