//! Architecture descriptions and training configuration.

use serde::{Deserialize, Serialize};

use crate::NnError;

/// Which of the three classifier architectures to build, with its
/// structural hyperparameters. Shapes are data, so alternative widths can
/// be constructed, but the defaults reproduce the reference setups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "arch", rename_all = "snake_case")]
pub enum ModelSpec {
    Dnn(DnnSpec),
    Cnn1d(CnnSpec),
    Lstm(LstmSpec),
}

/// Fully connected net: input -> hidden ReLU layers -> 1 sigmoid unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnnSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    /// Default L1/L2 coefficients applied when training this spec.
    pub l1: f64,
    pub l2: f64,
}

impl Default for DnnSpec {
    fn default() -> Self {
        Self { input: 140, hidden: vec![64, 64], l1: 1e-5, l2: 1e-5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayerSpec {
    pub filters: usize,
    pub kernel: usize,
}

/// 1-D convolutional net over the feature vector treated as a length-140
/// signal with one input channel. Each conv layer (valid padding, stride 1,
/// ReLU) is followed by width-2 max pooling with floor semantics; the final
/// maps are flattened into a ReLU fully connected layer with dropout, then
/// the sigmoid unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnSpec {
    pub input_len: usize,
    pub conv: Vec<ConvLayerSpec>,
    pub pool: usize,
    pub fc: usize,
    pub dropout: f64,
}

impl Default for CnnSpec {
    fn default() -> Self {
        Self {
            input_len: 140,
            conv: vec![
                ConvLayerSpec { filters: 64, kernel: 3 },
                ConvLayerSpec { filters: 64, kernel: 3 },
            ],
            pool: 2,
            fc: 128,
            dropout: 0.5,
        }
    }
}

/// Stacked LSTM reading the feature vector as a 140-step sequence of
/// scalars; the last hidden state feeds the sigmoid unit. Dropout applies
/// between stacked layers only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmSpec {
    pub seq_len: usize,
    pub features_per_step: usize,
    pub units: Vec<usize>,
    pub inter_layer_dropout: f64,
}

impl Default for LstmSpec {
    fn default() -> Self {
        Self { seq_len: 140, features_per_step: 1, units: vec![64, 64, 64], inter_layer_dropout: 0.1 }
    }
}

impl ModelSpec {
    pub fn dnn() -> Self {
        ModelSpec::Dnn(DnnSpec::default())
    }

    pub fn cnn1d() -> Self {
        ModelSpec::Cnn1d(CnnSpec::default())
    }

    pub fn lstm() -> Self {
        ModelSpec::Lstm(LstmSpec::default())
    }

    /// Width of the input vectors this spec consumes.
    pub fn input_width(&self) -> usize {
        match self {
            ModelSpec::Dnn(s) => s.input,
            ModelSpec::Cnn1d(s) => s.input_len,
            ModelSpec::Lstm(s) => s.seq_len * s.features_per_step,
        }
    }

    /// Short lowercase tag used in file names and reports.
    pub fn arch_name(&self) -> &'static str {
        match self {
            ModelSpec::Dnn(_) => "dnn",
            ModelSpec::Cnn1d(_) => "cnn1d",
            ModelSpec::Lstm(_) => "lstm",
        }
    }

    /// Regularization coefficients a trainer should apply by default.
    pub fn default_regularization(&self) -> (f64, f64) {
        match self {
            ModelSpec::Dnn(s) => (s.l1, s.l2),
            _ => (0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let bad = |m: String| Err(NnError::InvalidSpec(m));
        match self {
            ModelSpec::Dnn(s) => {
                if s.input == 0 || s.hidden.is_empty() || s.hidden.iter().any(|&h| h == 0) {
                    return bad("dnn dimensions must be positive".into());
                }
                if !(s.l1 >= 0.0 && s.l2 >= 0.0 && s.l1.is_finite() && s.l2.is_finite()) {
                    return bad("dnn regularization coefficients must be finite and >= 0".into());
                }
            }
            ModelSpec::Cnn1d(s) => {
                if s.input_len == 0 || s.conv.is_empty() || s.fc == 0 || s.pool == 0 {
                    return bad("cnn dimensions must be positive".into());
                }
                if s.conv.iter().any(|c| c.filters == 0 || c.kernel == 0) {
                    return bad("conv layers need positive filters and kernel".into());
                }
                if !(0.0..1.0).contains(&s.dropout) {
                    return bad(format!("dropout must lie in [0, 1), got {}", s.dropout));
                }
                // Every conv + pool stage must leave at least one position.
                let mut len = s.input_len;
                for c in &s.conv {
                    if len < c.kernel {
                        return bad(format!("conv kernel {} exceeds signal length {len}", c.kernel));
                    }
                    len = (len - c.kernel + 1) / s.pool;
                    if len == 0 {
                        return bad("pooling collapses the signal to zero length".into());
                    }
                }
            }
            ModelSpec::Lstm(s) => {
                if s.seq_len == 0 || s.features_per_step == 0 || s.units.is_empty() {
                    return bad("lstm dimensions must be positive".into());
                }
                if s.units.iter().any(|&u| u == 0) {
                    return bad("lstm layer widths must be positive".into());
                }
                if !(0.0..1.0).contains(&s.inter_layer_dropout) {
                    return bad(format!("dropout must lie in [0, 1), got {}", s.inter_layer_dropout));
                }
            }
        }
        Ok(())
    }
}

/// Adam optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { alpha: 1e-3, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Knobs for a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub adam: AdamParams,
    pub l1: f64,
    pub l2: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 100,
            epochs: 70,
            adam: AdamParams::default(),
            l1: 0.0,
            l2: 0.0,
            seed: 42,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    /// Default config with the regularization the given spec asks for.
    pub fn for_spec(spec: &ModelSpec) -> Self {
        let (l1, l2) = spec.default_regularization();
        Self { l1, l2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.epochs == 0 {
            return Err(NnError::InvalidConfig("epochs must be >= 1".into()));
        }
        let a = &self.adam;
        if !(a.beta1 > 0.0 && a.beta1 < 1.0 && a.beta2 > 0.0 && a.beta2 < 1.0) {
            return Err(NnError::InvalidConfig("adam betas must lie in (0, 1)".into()));
        }
        if !(a.alpha > 0.0 && a.alpha.is_finite()) || !(a.epsilon > 0.0) {
            return Err(NnError::InvalidConfig("adam alpha and epsilon must be positive".into()));
        }
        if self.l1 < 0.0 || self.l2 < 0.0 || !self.l1.is_finite() || !self.l2.is_finite() {
            return Err(NnError::InvalidConfig("regularization coefficients must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-epoch training curve entry; accuracies use threshold 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

/// Full training record, one entry per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    pub wall_time_s: f64,
}
