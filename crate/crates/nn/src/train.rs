//! Loss, optimizer, training loop and the finite-difference gradient check.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Gradients, Model};
use crate::spec::{AdamParams, EpochStats, ModelSpec, TrainConfig, TrainHistory};
use crate::{derive_seed, NnError};

/// Probability clip applied before the logs in the cross-entropy.
const BCE_EPS: f64 = 1e-7;

/// Chunk size for inference over large sets, bounding transient memory.
const EVAL_CHUNK: usize = 256;

/// A labeled design matrix: rows of features with 0/1 targets.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl DataSplit {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self, NnError> {
        if x.nrows() != y.len() {
            return Err(NnError::ShapeMismatch {
                expected: format!("{} labels", x.nrows()),
                got: format!("{}", y.len()),
            });
        }
        if y.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
            return Err(NnError::InvalidConfig("labels must lie in [0, 1]".into()));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Mean binary cross-entropy with probabilities clipped to
/// [BCE_EPS, 1 − BCE_EPS] before the logs.
pub fn bce_loss(probs: ArrayView1<f64>, labels: ArrayView1<f64>) -> f64 {
    debug_assert_eq!(probs.len(), labels.len());
    let mut sum = 0.0;
    for (&p, &y) in probs.iter().zip(labels.iter()) {
        let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
        sum -= y * p.ln() + (1.0 - y) * (1.0 - p).ln();
    }
    sum / probs.len() as f64
}

/// Fraction of predictions (threshold 0.5) matching the labels.
pub fn accuracy(probs: ArrayView1<f64>, labels: ArrayView1<f64>) -> f64 {
    let correct = probs
        .iter()
        .zip(labels.iter())
        .filter(|(&p, &y)| (p >= 0.5) == (y >= 0.5))
        .count();
    correct as f64 / probs.len() as f64
}

/// l1·Σ|w| + l2·Σw² over weight tensors only; biases carry no penalty.
pub fn regularization_penalty(model: &Model, l1: f64, l2: f64) -> f64 {
    if l1 == 0.0 && l2 == 0.0 {
        return 0.0;
    }
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for t in model.tensors() {
        if t.is_weight {
            for &w in t.data {
                abs_sum += w.abs();
                sq_sum += w * w;
            }
        }
    }
    l1 * abs_sum + l2 * sq_sum
}

/// Add ∂/∂w of the penalty: l1·sign(w) (0 at w = 0) + 2·l2·w, weights only.
pub(crate) fn add_regularization(model: &Model, grads: &mut Gradients, l1: f64, l2: f64) {
    if l1 == 0.0 && l2 == 0.0 {
        return;
    }
    for (t, g) in model.tensors().iter().zip(grads.0.iter_mut()) {
        if !t.is_weight {
            continue;
        }
        for (gi, &w) in g.iter_mut().zip(t.data.iter()) {
            *gi += l1 * w.signum() * f64::from(w != 0.0) + 2.0 * l2 * w;
        }
    }
}

impl Model {
    /// One combined pass: regularized loss, probabilities and gradients of
    /// the loss w.r.t. every parameter tensor.
    pub fn loss_grads(
        &self,
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        training: bool,
        seed: u64,
        l1: f64,
        l2: f64,
    ) -> Result<(f64, Array1<f64>, Gradients), NnError> {
        self.check_input(x)?;
        if x.nrows() != y.len() {
            return Err(NnError::ShapeMismatch {
                expected: format!("{} labels", x.nrows()),
                got: format!("{}", y.len()),
            });
        }
        let (probs, cache) = self.forward_cached(x, training, seed);
        let mut grads = Gradients(self.backward_cached(&cache, &probs, y));
        add_regularization(self, &mut grads, l1, l2);
        let loss = bce_loss(probs.view(), y) + regularization_penalty(self, l1, l2);
        Ok((loss, probs, grads))
    }
}

/// First/second moment accumulators, aligned with tensor order.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> Self {
        let shapes: Vec<usize> = model.tensors().iter().map(|t| t.data.len()).collect();
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(model: &mut Model, grads: &Gradients, state: &mut AdamState, hp: &AdamParams) {
    state.t += 1;
    let bc1 = 1.0 - hp.beta1.powi(state.t as i32);
    let bc2 = 1.0 - hp.beta2.powi(state.t as i32);
    for (k, tensor) in model.tensors_mut().into_iter().enumerate() {
        let (m, v, g) = (&mut state.m[k], &mut state.v[k], &grads.0[k]);
        for i in 0..tensor.data.len() {
            m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g[i];
            v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            tensor.data[i] -= hp.alpha * m_hat / (v_hat.sqrt() + hp.epsilon);
        }
    }
}

/// Loss (with the given penalties) and accuracy of a model on a dataset,
/// inference mode, evaluated in bounded chunks.
pub fn evaluate(model: &Model, data: &DataSplit, l1: f64, l2: f64) -> Result<(f64, f64), NnError> {
    let probs = predict(model, data.x.view())?;
    let loss = bce_loss(probs.view(), data.y.view()) + regularization_penalty(model, l1, l2);
    Ok((loss, accuracy(probs.view(), data.y.view())))
}

/// Inference-mode probabilities for an arbitrary number of rows.
pub fn predict(model: &Model, x: ArrayView2<f64>) -> Result<Array1<f64>, NnError> {
    let mut out = Array1::zeros(x.nrows());
    let mut row = 0;
    while row < x.nrows() {
        let end = (row + EVAL_CHUNK).min(x.nrows());
        let chunk = x.slice(ndarray::s![row..end, ..]);
        let probs = model.forward(chunk, false, 0)?;
        out.slice_mut(ndarray::s![row..end]).assign(&probs);
        row = end;
    }
    Ok(out)
}

/// Mini-batch Adam training with per-epoch seeded shuffling. The recorded
/// train loss/accuracy are running means over the epoch's batches (measured
/// as the parameters move); validation is measured once at each epoch end.
pub fn train(
    spec: &ModelSpec,
    train_set: &DataSplit,
    val_set: &DataSplit,
    cfg: &TrainConfig,
) -> Result<(Model, TrainHistory), NnError> {
    spec.validate()?;
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(NnError::InvalidConfig("training set is empty".into()));
    }
    let started = Instant::now();
    let mut model = Model::build(spec, cfg.seed)?;
    let mut adam = AdamState::new(&model);
    let n = train_set.len();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        if cfg.shuffle {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1, epoch as u64));
            order.shuffle(&mut rng);
        }

        let mut loss_sum = 0.0;
        let mut correct = 0.0;
        for (step, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let xb = train_set.x.select(Axis(0), chunk);
            let yb = train_set.y.select(Axis(0), chunk);
            let mask_seed = derive_seed(cfg.seed, 2 + epoch as u64, step as u64);
            let (loss, probs, grads) =
                model.loss_grads(xb.view(), yb.view(), true, mask_seed, cfg.l1, cfg.l2)?;
            loss_sum += loss * chunk.len() as f64;
            correct += accuracy(probs.view(), yb.view()) * chunk.len() as f64;
            adam_step(&mut model, &grads, &mut adam, &cfg.adam);
        }

        let (val_loss, val_acc) = evaluate(&model, val_set, cfg.l1, cfg.l2)?;
        history.push(EpochStats {
            train_loss: loss_sum / n as f64,
            train_acc: correct / n as f64,
            val_loss,
            val_acc,
        });
    }

    Ok((model, TrainHistory { epochs: history, wall_time_s: started.elapsed().as_secs_f64() }))
}

/// Compare analytic gradients against central finite differences on a
/// single labeled sample. Checks every coordinate of tensors up to 200
/// entries and a seeded 200-coordinate sample of larger ones; returns the
/// worst relative error, |fd − g| / max(|fd|, |g|, 10⁻⁶). Dropout and
/// regularization are disabled so both sides differentiate the same
/// function.
pub fn gradient_check(
    spec: &ModelSpec,
    sample: ArrayView1<f64>,
    label: f64,
    eps: f64,
    seed: u64,
) -> Result<f64, NnError> {
    const COORDS_PER_TENSOR: usize = 200;
    let mut model = Model::build(spec, seed)?;
    let x = sample.insert_axis(Axis(0)).to_owned();
    let y = ndarray::arr1(&[label]);
    let (_, _, analytic) = model.loss_grads(x.view(), y.view(), false, 0, 0.0, 0.0)?;

    let probe = |model: &mut Model, k: usize, i: usize, value: f64| -> f64 {
        let old = {
            let mut ts = model.tensors_mut();
            let slot = &mut ts[k].data[i];
            let old = *slot;
            *slot = value;
            old
        };
        let probs = model.forward(x.view(), false, 0).expect("shape already checked");
        let loss = bce_loss(probs.view(), y.view());
        model.tensors_mut()[k].data[i] = old;
        loss
    };

    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 97, 0));
    for k in 0..analytic.0.len() {
        let len = analytic.0[k].len();
        let coords: Vec<usize> = if len <= COORDS_PER_TENSOR {
            (0..len).collect()
        } else {
            rand::seq::index::sample(&mut rng, len, COORDS_PER_TENSOR).into_vec()
        };
        for i in coords {
            let base = model.tensors()[k].data[i];
            let plus = probe(&mut model, k, i, base + eps);
            let minus = probe(&mut model, k, i, base - eps);
            let fd = (plus - minus) / (2.0 * eps);
            let g = analytic.0[k][i];
            let rel = (fd - g).abs() / fd.abs().max(g.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
