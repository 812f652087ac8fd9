//! Deterministic synthetic instruction-trace corpus.
//!
//! Real malware samples cannot ship with the repository, so the pipeline is
//! exercised on generated traces instead. Each class draws mnemonics from a
//! mixture q = (1 − separation) · base + separation · profile, where the two
//! class profiles are disjoint: the ransomware-like profile leans on
//! logical/shift/crypto instructions, the normal-like profile on data
//! transfer and ordinary control flow. At separation 1 the classes share no
//! mnemonics; at separation 0 they are the same distribution.

use rand::distributions::{Distribution, Uniform, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{featurize, Dataset, FeatureVector, Label};
use crate::layout::FeatureLayout;
use crate::trace::InstructionTrace;
use crate::FeatureError;

/// Weighted mnemonic pools. Weights are relative; they need not sum to 1.
const BASE_POOL: &[(&str, f64)] = &[
    ("mov", 16.0),
    ("cmp", 8.0),
    ("add", 7.0),
    ("sub", 6.0),
    ("call", 6.0),
    ("push", 6.0),
    ("pop", 6.0),
    ("test", 5.0),
    ("jmp", 5.0),
    ("je", 5.0),
    ("lea", 5.0),
    ("xor", 5.0),
    ("jne", 4.0),
    ("ret", 4.0),
    ("and", 3.0),
    ("or", 3.0),
    ("nop", 3.0),
    ("shl", 2.0),
    ("inc", 2.0),
    ("dec", 2.0),
    ("movzx", 2.0),
    ("endbr64", 2.0), // no individual slot in the default layout
    ("imul", 1.0),
    ("loop", 1.0),
    ("not", 1.0),
];

const RANSOMWARE_POOL: &[(&str, f64)] = &[
    ("xor", 18.0),
    ("pxor", 10.0),
    ("aesenc", 9.0),
    ("rol", 8.0),
    ("ror", 8.0),
    ("aesdec", 7.0),
    ("shl", 7.0),
    ("shr", 7.0),
    ("loop", 6.0),
    ("not", 5.0),
    ("neg", 5.0),
    ("sbb", 4.0),
    ("rcl", 3.0),
    ("rcr", 3.0),
];

const NORMAL_POOL: &[(&str, f64)] = &[
    ("mov", 30.0),
    ("call", 12.0),
    ("lea", 10.0),
    ("push", 10.0),
    ("pop", 10.0),
    ("ret", 8.0),
    ("je", 6.0),
    ("jne", 6.0),
    ("jmp", 5.0),
    ("movzx", 3.0),
];

/// Knobs for the generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_ransomware: usize,
    pub n_normal: usize,
    /// Mixture weight of the class profile, in [0, 1].
    pub separation: f64,
    /// Inclusive bounds on trace length.
    pub min_len: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            n_ransomware: 561,
            n_normal: 447,
            separation: 0.9,
            min_len: 600,
            max_len: 1800,
            seed: 7,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(0.0..=1.0).contains(&self.separation) || !self.separation.is_finite() {
            return Err(FeatureError::SeparationRange(self.separation));
        }
        Ok(())
    }
}

struct Pool {
    mnemonics: Vec<&'static str>,
    dist: WeightedIndex<f64>,
}

impl Pool {
    fn new(entries: &[(&'static str, f64)]) -> Pool {
        Pool {
            mnemonics: entries.iter().map(|(m, _)| *m).collect(),
            dist: WeightedIndex::new(entries.iter().map(|(_, w)| *w))
                .expect("pool weights are positive"),
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> &'static str {
        self.mnemonics[self.dist.sample(rng)]
    }
}

fn sample_trace(
    rng: &mut ChaCha8Rng,
    len_dist: &Uniform<usize>,
    base: &Pool,
    profile: &Pool,
    separation: f64,
) -> InstructionTrace {
    let len = len_dist.sample(rng);
    let mut mnemonics = Vec::with_capacity(len);
    for _ in 0..len {
        let pool = if rng.gen::<f64>() < separation { profile } else { base };
        mnemonics.push(pool.sample(rng).to_string());
    }
    InstructionTrace { mnemonics, skipped_lines: 0 }
}

/// Generate labeled traces: all ransomware traces first, then all normal.
pub fn synth_traces(params: &SynthParams) -> Result<Vec<(InstructionTrace, Label)>, FeatureError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let len_dist = Uniform::new_inclusive(params.min_len, params.max_len.max(params.min_len));
    let base = Pool::new(BASE_POOL);
    let ransomware = Pool::new(RANSOMWARE_POOL);
    let normal = Pool::new(NORMAL_POOL);

    let mut out = Vec::with_capacity(params.n_ransomware + params.n_normal);
    for _ in 0..params.n_ransomware {
        let t = sample_trace(&mut rng, &len_dist, &base, &ransomware, params.separation);
        out.push((t, Label::Ransomware));
    }
    for _ in 0..params.n_normal {
        let t = sample_trace(&mut rng, &len_dist, &base, &normal, params.separation);
        out.push((t, Label::Normal));
    }
    Ok(out)
}

/// Generate traces and featurize them into a raw-count dataset.
pub fn synth_corpus(params: &SynthParams, layout: &FeatureLayout) -> Result<Dataset, FeatureError> {
    let traces = synth_traces(params)?;
    let rows = traces
        .into_iter()
        .map(|(trace, label)| {
            FeatureVector::new(featurize(&trace, layout), label)
                .expect("featurize emits full-width vectors")
        })
        .collect();
    Ok(Dataset { rows, layout: layout.clone() })
}
