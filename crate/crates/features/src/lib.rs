//! Opcode-frequency features for ransomware detection.
//!
//! An instruction trace (one mnemonic per line, as produced by a binary
//! instrumentation run) is reduced to a fixed 140-wide vector of opcode
//! counts: 132 slots for individual mnemonics plus 8 slots for instruction
//! groups (data transfer, arithmetic, logical, shift, control transfer,
//! string, stack and a catch-all). The split between individual and grouped
//! mnemonics lives in an editable manifest, not in code — see
//! [`layout::FeatureLayout`].
//!
//! The crate also ships a deterministic synthetic corpus generator so the
//! training pipeline can be exercised end to end without shipping malware
//! samples.

pub mod csvio;
pub mod data;
pub mod layout;
pub mod scaler;
pub mod synth;
pub mod trace;

pub use data::{featurize, group_total, Dataset, FeatureVector, Label};
pub use layout::FeatureLayout;
pub use scaler::{fit_scaler, ScalerModel, ScalerParams};
pub use synth::{synth_corpus, synth_traces, SynthParams};
pub use trace::{parse_trace, InstructionTrace};

/// Width of every feature vector: 132 mnemonic slots + 8 group slots.
pub const FEATURE_DIM: usize = 140;

/// Number of individual mnemonic slots in a valid layout.
pub const MNEMONIC_SLOTS: usize = 132;

/// Number of instruction-group slots in a valid layout.
pub const GROUP_SLOTS: usize = 8;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("layout error at line {line}: {message}")]
    Layout { line: usize, message: String },
    #[error("layout must define {MNEMONIC_SLOTS} mnemonics and {GROUP_SLOTS} groups, got {mnemonics} and {groups}")]
    LayoutShape { mnemonics: usize, groups: usize },
    #[error("layout is missing the catch-all group \"misc\"")]
    MissingCatchAll,
    #[error("csv error at row {row}, column {col}: {message}")]
    Csv { row: usize, col: usize, message: String },
    #[error("csv header mismatch: {0}")]
    CsvHeader(String),
    #[error("label must be 0 or 1, got {value:?} at row {row}")]
    LabelDomain { row: usize, value: String },
    #[error("feature vector has {got} values, expected {FEATURE_DIM}")]
    VectorWidth { got: usize },
    #[error("separation must lie in [0, 1], got {0}")]
    SeparationRange(f64),
    #[error("cannot fit a scaler on an empty dataset")]
    EmptyDataset,
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
