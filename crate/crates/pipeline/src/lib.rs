//! Dataset generation, tokenization, and evaluation for the automata
//! toolkit: instruction-formatted corpora over exact one-step transitions,
//! a fixed 22-token vocabulary, and the accuracy/dissimilarity metrics used
//! to judge both forecasting and rule inference.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod tokenizer;

pub use datagen::{
    broad_entropy_order, build_dataset, build_shared_test_set, format_sample, format_triad,
    generate_ic, parse_sample, parse_sample_at, read_dataset_lines, read_manifest, split_sizes,
    write_dataset_file, write_manifest, Dataset, DatasetManifest, OrderParameters, Sample, Split,
    Task,
};
pub use error::PipelineError;
pub use eval::{
    aggregate, default_bin_edges, emit_report, ols, read_per_sample_table,
    regress_accuracy_vs_distance, score_forward, score_inverse, AccuracyKind, DistanceTriple,
    EvalRecord, EvalReport, EvalSummary, Histogram, InverseFlag, InverseScore, RegressionResult,
    ReportDatasetInfo, TaggedRegression,
};
pub use tokenizer::{
    extract_binary, BinaryScan, TokenId, TokenSequence, Vocabulary, BGS2_ID, BIC_ID, BOS_ID,
    EGS2_ID, EIC_ID, EOS_ID, MASK_ID, ONE_ID, PAD_ID, R_ID, VOCAB_SIZE, ZERO_ID,
};
