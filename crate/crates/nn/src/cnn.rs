//! 1-D convolutional classifier.
//!
//! Pipeline per conv stage: valid convolution (stride 1) → ReLU → max pool
//! (width = `pool`, stride = `pool`, floor semantics). The final maps are
//! flattened channel-major into a ReLU fully connected layer with inverted
//! dropout, then a single sigmoid unit. Convolutions run as im2col + one
//! matrix multiply; weights are stored as (in_channels · kernel) × filters.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::init_weight;
use crate::spec::CnnSpec;
use crate::{dropout_mask, sigmoid};

#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    /// Per conv stage: (weights (in_ch·kernel)×filters, bias filters).
    pub conv: Vec<(Array2<f64>, Array1<f64>)>,
    pub fc_w: Array2<f64>,
    pub fc_b: Array1<f64>,
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
}

struct ConvStage {
    /// im2col matrix of this stage's input, (B·out_len) × (in_ch·kernel).
    cols: Array2<f64>,
    /// Pre-ReLU feature maps (B, filters, out_len).
    z: Array3<f64>,
    /// Index of the max within each pool window.
    pool_arg: Array3<usize>,
}

pub(crate) struct CnnCache {
    stages: Vec<ConvStage>,
    flat: Array2<f64>,
    z_fc: Array2<f64>,
    /// FC activation after dropout — what the output layer saw.
    a_fc: Array2<f64>,
    mask: Option<Array2<f64>>,
}

/// Signal lengths after each conv+pool stage, ending with the flatten width.
pub(crate) fn stage_lengths(spec: &CnnSpec) -> Vec<usize> {
    let mut lens = Vec::with_capacity(spec.conv.len());
    let mut len = spec.input_len;
    for c in &spec.conv {
        len = (len - c.kernel + 1) / spec.pool;
        lens.push(len);
    }
    lens
}

/// Width of the flattened vector feeding the FC layer.
pub(crate) fn flat_dim(spec: &CnnSpec) -> usize {
    let lens = stage_lengths(spec);
    lens.last().unwrap() * spec.conv.last().unwrap().filters
}

fn im2col(input: &Array3<f64>, kernel: usize) -> Array2<f64> {
    let (b, c, l) = input.dim();
    let out = l - kernel + 1;
    let mut cols = Array2::zeros((b * out, c * kernel));
    for bi in 0..b {
        for t in 0..out {
            let mut row = cols.row_mut(bi * out + t);
            for ci in 0..c {
                for k in 0..kernel {
                    row[ci * kernel + k] = input[(bi, ci, t + k)];
                }
            }
        }
    }
    cols
}

/// Scatter-add of im2col's adjoint: each column gradient flows back to the
/// input position it was read from.
fn col2im(dcols: &Array2<f64>, b: usize, c: usize, l: usize, kernel: usize) -> Array3<f64> {
    let out = l - kernel + 1;
    let mut dinput = Array3::zeros((b, c, l));
    for bi in 0..b {
        for t in 0..out {
            let row = dcols.row(bi * out + t);
            for ci in 0..c {
                for k in 0..kernel {
                    dinput[(bi, ci, t + k)] += row[ci * kernel + k];
                }
            }
        }
    }
    dinput
}

fn max_pool(input: &Array3<f64>, pool: usize) -> (Array3<f64>, Array3<usize>) {
    let (b, f, l) = input.dim();
    let p = l / pool;
    let mut out = Array3::zeros((b, f, p));
    let mut arg = Array3::zeros((b, f, p));
    for bi in 0..b {
        for fi in 0..f {
            for t in 0..p {
                let mut best = input[(bi, fi, t * pool)];
                let mut best_k = 0;
                for k in 1..pool {
                    let v = input[(bi, fi, t * pool + k)];
                    if v > best {
                        best = v;
                        best_k = k;
                    }
                }
                out[(bi, fi, t)] = best;
                arg[(bi, fi, t)] = best_k;
            }
        }
    }
    (out, arg)
}

fn unpool(dout: &Array3<f64>, arg: &Array3<usize>, pool: usize, l: usize) -> Array3<f64> {
    let (b, f, p) = dout.dim();
    let mut din = Array3::zeros((b, f, l));
    for bi in 0..b {
        for fi in 0..f {
            for t in 0..p {
                din[(bi, fi, t * pool + arg[(bi, fi, t)])] = dout[(bi, fi, t)];
            }
        }
    }
    din
}

/// (B·out)×F activations back into (B, F, out) maps.
fn rows_to_maps(rows: Array2<f64>, b: usize, out: usize) -> Array3<f64> {
    let f = rows.ncols();
    rows.into_shape_with_order((b, out, f))
        .expect("row count is B·out")
        .permuted_axes([0, 2, 1])
        .as_standard_layout()
        .to_owned()
}

fn maps_to_rows(maps: &Array3<f64>) -> Array2<f64> {
    let (b, f, out) = maps.dim();
    maps.view()
        .permuted_axes([0, 2, 1])
        .as_standard_layout()
        .to_owned()
        .into_shape_with_order((b * out, f))
        .expect("contiguous after permute")
}

impl CnnParams {
    pub(crate) fn build(spec: &CnnSpec, rng: &mut ChaCha8Rng) -> CnnParams {
        let mut conv = Vec::with_capacity(spec.conv.len());
        let mut in_ch = 1;
        for c in &spec.conv {
            let fan_in = in_ch * c.kernel;
            conv.push((init_weight(rng, fan_in, c.filters), Array1::zeros(c.filters)));
            in_ch = c.filters;
        }
        let flat = flat_dim(spec);
        CnnParams {
            conv,
            fc_w: init_weight(rng, flat, spec.fc),
            fc_b: Array1::zeros(spec.fc),
            out_w: init_weight(rng, spec.fc, 1),
            out_b: Array1::zeros(1),
        }
    }

    pub(crate) fn forward(
        &self,
        spec: &CnnSpec,
        x: ArrayView2<f64>,
        training: bool,
        seed: u64,
    ) -> (Array1<f64>, CnnCache) {
        let b = x.nrows();
        let mut maps = x
            .to_owned()
            .into_shape_with_order((b, 1, spec.input_len))
            .expect("input rows are the signal");
        let mut stages = Vec::with_capacity(self.conv.len());
        for (stage, (w, bias)) in self.conv.iter().enumerate() {
            let kernel = spec.conv[stage].kernel;
            let cols = im2col(&maps, kernel);
            let rows = cols.dot(w) + bias;
            let out_len = maps.dim().2 - kernel + 1;
            let z = rows_to_maps(rows, b, out_len);
            let a = z.mapv(|v| v.max(0.0));
            let (pooled, pool_arg) = max_pool(&a, spec.pool);
            stages.push(ConvStage { cols, z, pool_arg });
            maps = pooled;
        }

        let flat = maps.into_shape_with_order((b, flat_dim(spec))).expect("flatten is contiguous");
        let z_fc = flat.dot(&self.fc_w) + &self.fc_b;
        let mut a_fc = z_fc.mapv(|v| v.max(0.0));
        let mask = if training && spec.dropout > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = Array2::from_shape_vec(
                a_fc.dim(),
                dropout_mask(&mut rng, a_fc.len(), spec.dropout),
            )
            .expect("mask length matches");
            a_fc *= &m;
            Some(m)
        } else {
            None
        };
        let zo = a_fc.dot(&self.out_w) + &self.out_b;
        let probs = zo.column(0).mapv(sigmoid);
        (probs, CnnCache { stages, flat, z_fc, a_fc, mask })
    }

    /// Gradients in tensor order: (w, b) per conv stage, fc_w, fc_b,
    /// out_w, out_b.
    pub(crate) fn backward(
        &self,
        spec: &CnnSpec,
        cache: &CnnCache,
        probs: &Array1<f64>,
        labels: ArrayView1<f64>,
    ) -> Vec<Vec<f64>> {
        let b = probs.len();
        let dzo = (probs - &labels)
            .mapv(|d| d / b as f64)
            .into_shape_with_order((b, 1))
            .expect("column reshape");

        let d_out_w = cache.a_fc.t().dot(&dzo);
        let d_out_b = dzo.sum_axis(Axis(0));

        let mut da_fc = dzo.dot(&self.out_w.t());
        if let Some(mask) = &cache.mask {
            da_fc *= mask;
        }
        let dz_fc = &da_fc * &cache.z_fc.mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
        let d_fc_w = cache.flat.t().dot(&dz_fc);
        let d_fc_b = dz_fc.sum_axis(Axis(0));

        let lens = stage_lengths(spec);
        let top_filters = spec.conv.last().unwrap().filters;
        let mut dmaps = dz_fc
            .dot(&self.fc_w.t())
            .into_shape_with_order((b, top_filters, *lens.last().unwrap()))
            .expect("unflatten");

        let mut d_conv = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.conv.len()];
        for stage in (0..self.conv.len()).rev() {
            let st = &cache.stages[stage];
            let (_, _, conv_len) = st.z.dim();
            let da = unpool(&dmaps, &st.pool_arg, spec.pool, conv_len);
            let dz = &da * &st.z.mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
            let dz_rows = maps_to_rows(&dz);
            d_conv[stage] = (st.cols.t().dot(&dz_rows), dz_rows.sum_axis(Axis(0)));
            if stage > 0 {
                let dcols = dz_rows.dot(&self.conv[stage].0.t());
                let in_ch = spec.conv[stage - 1].filters;
                let in_len = lens[stage - 1];
                dmaps = col2im(&dcols, b, in_ch, in_len, spec.conv[stage].kernel);
            }
        }

        let mut grads = Vec::with_capacity(2 * self.conv.len() + 4);
        for (dw, db) in d_conv {
            grads.push(dw.into_raw_vec_and_offset().0);
            grads.push(db.into_raw_vec_and_offset().0);
        }
        grads.push(d_fc_w.into_raw_vec_and_offset().0);
        grads.push(d_fc_b.into_raw_vec_and_offset().0);
        grads.push(d_out_w.into_raw_vec_and_offset().0);
        grads.push(d_out_b.into_raw_vec_and_offset().0);
        grads
    }
}
