//! Feature vectors, labels and labeled datasets.

use serde::{Deserialize, Serialize};

use crate::layout::FeatureLayout;
use crate::trace::InstructionTrace;
use crate::{FeatureError, FEATURE_DIM, MNEMONIC_SLOTS};

/// Class label. Ransomware is the positive class and is encoded as 0 on disk;
/// normal software is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Ransomware,
    Normal,
}

impl Label {
    pub fn from_int(v: i64) -> Option<Label> {
        match v {
            0 => Some(Label::Ransomware),
            1 => Some(Label::Normal),
            _ => None,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Label::Ransomware => 0,
            Label::Normal => 1,
        }
    }

    /// Training target: the model regresses toward P(normal).
    pub fn as_f64(self) -> f64 {
        self.as_int() as f64
    }
}

/// One labeled observation: 140 reals (raw counts or scaled values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Label,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: Label) -> Result<Self, FeatureError> {
        if values.len() != FEATURE_DIM {
            return Err(FeatureError::VectorWidth { got: values.len() });
        }
        Ok(Self { values, label })
    }
}

/// A labeled dataset tied to the layout its vectors were extracted with.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub layout: FeatureLayout,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (ransomware, normal) row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let r = self.rows.iter().filter(|v| v.label == Label::Ransomware).count();
        (r, self.rows.len() - r)
    }

    pub fn labels(&self) -> Vec<Label> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Count opcode occurrences into the 140-slot layout.
///
/// Every instruction increments exactly one group slot; instructions whose
/// mnemonic has an individual slot increment that too. The group slots
/// therefore sum to the trace length, and each group slot dominates the sum
/// of its member mnemonic slots.
pub fn featurize(trace: &InstructionTrace, layout: &FeatureLayout) -> Vec<f64> {
    let mut values = vec![0.0; FEATURE_DIM];
    for m in &trace.mnemonics {
        if let Some(slot) = layout.mnemonic_slot(m) {
            values[slot] += 1.0;
        }
        values[layout.group_slot(m)] += 1.0;
    }
    values
}

/// Sum of the 8 group slots — equals the number of counted instructions.
pub fn group_total(values: &[f64]) -> f64 {
    values[MNEMONIC_SLOTS..FEATURE_DIM].iter().sum()
}
