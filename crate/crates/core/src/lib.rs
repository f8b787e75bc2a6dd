//! Exact machinery for 2D binary deterministic cellular automata with r=1
//! Moore neighborhoods on toroidal grids: one-step evolution, rule-space
//! generation and dissimilarity metrics, and a brute-force inverse solver
//! that recovers every rule consistent with an observed transition.
//!
//! All operations are pure functions over immutable inputs and safe to share
//! across threads.

pub mod engine;
pub mod error;
pub mod grid;
pub mod oracle;
pub mod rules;
pub mod rulespace;

pub use engine::{orbit, step};
pub use error::CoreError;
pub use grid::{metastate_of, Grid, Metastate, DEFAULT_GRID_SIZE, METASTATE_COUNT};
pub use oracle::{
    canonical_completion, consistent_rules, consistent_rules_capped, infer_constraints,
    validate_rm, ColumnConstraints, ConsistentRules, RmValidity, DEFAULT_ENUMERATION_CAP,
};
pub use rules::{rule_space_size, RuleId, RulesMatrix, RULE_FLAT_LEN};
pub use rulespace::{
    distance, mean_nearest_distance, DistanceMetric, RuleDistance, TrainingRuleSet,
};
