//! Stacked LSTM classifier trained with full backpropagation through time.
//!
//! The feature vector is read as a `seq_len`-step sequence
//! (`features_per_step` values per step). Gate blocks are stored
//! concatenated in i, f, g, o order, so each layer carries one input
//! projection (in × 4H), one recurrent projection (H × 4H) and one bias
//! (4H). The input projections and all weight-gradient contractions are
//! batched across time as single matrix products; only the recurrence
//! itself runs step by step.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::init_weight;
use crate::spec::LstmSpec;
use crate::{dropout_mask, sigmoid};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub layers: Vec<LstmLayer>,
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
}

pub(crate) struct LstmCache {
    /// Per layer: the (T·B × in) input it consumed (post-dropout).
    x_in: Vec<Array2<f64>>,
    /// Per layer: activated gates (T·B × 4H).
    gates: Vec<Array2<f64>>,
    /// Per layer: cell states (T·B × H) and their tanh.
    c_all: Vec<Array2<f64>>,
    tanh_c: Vec<Array2<f64>>,
    /// Per layer: hidden states before inter-layer dropout.
    h_all: Vec<Array2<f64>>,
    /// Dropout masks between consecutive layers (layer count − 1 entries).
    masks: Vec<Option<Array2<f64>>>,
    batch: usize,
}

/// Reshape a B×(T·F) batch into time-major (T·B × F) sequence rows.
fn seq_input(x: ArrayView2<f64>, seq_len: usize, features: usize) -> Array2<f64> {
    let b = x.nrows();
    let mut out = Array2::zeros((seq_len * b, features));
    for t in 0..seq_len {
        for bi in 0..b {
            for j in 0..features {
                out[(t * b + bi, j)] = x[(bi, t * features + j)];
            }
        }
    }
    out
}

/// One layer's pass over the whole sequence. Returns
/// (gates, c_all, tanh_c, h_all), each T·B rows.
fn run_layer(
    layer: &LstmLayer,
    x_in: &Array2<f64>,
    seq_len: usize,
    batch: usize,
) -> (Array2<f64>, Array2<f64>, Array2<f64>, Array2<f64>) {
    let h_dim = layer.u.nrows();
    let xw_all = x_in.dot(&layer.w);
    let mut gates = Array2::zeros((seq_len * batch, 4 * h_dim));
    let mut c_all = Array2::zeros((seq_len * batch, h_dim));
    let mut tanh_c_all = Array2::zeros((seq_len * batch, h_dim));
    let mut h_all = Array2::zeros((seq_len * batch, h_dim));

    let mut h: Array2<f64> = Array2::zeros((batch, h_dim));
    let mut c: Array2<f64> = Array2::zeros((batch, h_dim));
    for t in 0..seq_len {
        let rows = t * batch..(t + 1) * batch;
        let mut z = h.dot(&layer.u);
        z += &xw_all.slice(s![rows.clone(), ..]);
        z += &layer.b;

        let mut g_t = gates.slice_mut(s![rows.clone(), ..]);
        for bi in 0..batch {
            for j in 0..h_dim {
                let i_v = sigmoid(z[(bi, j)]);
                let f_v = sigmoid(z[(bi, h_dim + j)]);
                let g_v = z[(bi, 2 * h_dim + j)].tanh();
                let o_v = sigmoid(z[(bi, 3 * h_dim + j)]);
                g_t[(bi, j)] = i_v;
                g_t[(bi, h_dim + j)] = f_v;
                g_t[(bi, 2 * h_dim + j)] = g_v;
                g_t[(bi, 3 * h_dim + j)] = o_v;
                let c_v = f_v * c[(bi, j)] + i_v * g_v;
                let th = c_v.tanh();
                c[(bi, j)] = c_v;
                c_all[(t * batch + bi, j)] = c_v;
                tanh_c_all[(t * batch + bi, j)] = th;
                let h_v = o_v * th;
                h[(bi, j)] = h_v;
                h_all[(t * batch + bi, j)] = h_v;
            }
        }
    }
    (gates, c_all, tanh_c_all, h_all)
}

impl LstmParams {
    pub(crate) fn build(spec: &LstmSpec, rng: &mut ChaCha8Rng) -> LstmParams {
        let mut layers = Vec::with_capacity(spec.units.len());
        let mut in_dim = spec.features_per_step;
        for &h in &spec.units {
            let w = init_weight(rng, in_dim, 4 * h);
            let u = init_weight(rng, h, 4 * h);
            let mut b = Array1::zeros(4 * h);
            // Forget-gate block starts at 1 so early training retains state.
            b.slice_mut(s![h..2 * h]).fill(1.0);
            layers.push(LstmLayer { w, u, b });
            in_dim = h;
        }
        LstmParams {
            layers,
            head_w: init_weight(rng, *spec.units.last().unwrap(), 1),
            head_b: Array1::zeros(1),
        }
    }

    pub(crate) fn forward(
        &self,
        spec: &LstmSpec,
        x: ArrayView2<f64>,
        training: bool,
        seed: u64,
    ) -> (Array1<f64>, LstmCache) {
        let batch = x.nrows();
        let t_len = spec.seq_len;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // One mask per layer transition, shared across all timesteps.
        let masks: Vec<Option<Array2<f64>>> = (0..self.layers.len().saturating_sub(1))
            .map(|l| {
                if training && spec.inter_layer_dropout > 0.0 {
                    let h = self.layers[l].u.nrows();
                    Some(
                        Array2::from_shape_vec(
                            (batch, h),
                            dropout_mask(&mut rng, batch * h, spec.inter_layer_dropout),
                        )
                        .expect("mask length matches"),
                    )
                } else {
                    None
                }
            })
            .collect();

        let mut x_in_list = Vec::with_capacity(self.layers.len());
        let mut gates_list = Vec::with_capacity(self.layers.len());
        let mut c_list = Vec::with_capacity(self.layers.len());
        let mut tanh_list = Vec::with_capacity(self.layers.len());
        let mut h_list = Vec::with_capacity(self.layers.len());

        let mut x_in = seq_input(x, t_len, spec.features_per_step);
        for (l, layer) in self.layers.iter().enumerate() {
            let (gates, c_all, tanh_c, h_all) = run_layer(layer, &x_in, t_len, batch);
            let mut next = h_all.clone();
            if l + 1 < self.layers.len() {
                if let Some(mask) = &masks[l] {
                    for t in 0..t_len {
                        let mut rows = next.slice_mut(s![t * batch..(t + 1) * batch, ..]);
                        rows *= mask;
                    }
                }
            }
            x_in_list.push(x_in);
            gates_list.push(gates);
            c_list.push(c_all);
            tanh_list.push(tanh_c);
            h_list.push(h_all);
            x_in = next;
        }

        // x_in now holds the top layer's outputs; the head reads the final step.
        let h_last = x_in.slice(s![(t_len - 1) * batch.., ..]);
        let zo = h_last.dot(&self.head_w) + &self.head_b;
        let probs = zo.column(0).mapv(sigmoid);
        (
            probs,
            LstmCache {
                x_in: x_in_list,
                gates: gates_list,
                c_all: c_list,
                tanh_c: tanh_list,
                h_all: h_list,
                masks,
                batch,
            },
        )
    }

    /// Gradients in tensor order: (w, u, b) per layer, then head_w, head_b.
    pub(crate) fn backward(
        &self,
        spec: &LstmSpec,
        cache: &LstmCache,
        probs: &Array1<f64>,
        labels: ArrayView1<f64>,
    ) -> Vec<Vec<f64>> {
        let batch = cache.batch;
        let t_len = spec.seq_len;
        let dzo = (probs - &labels)
            .mapv(|d| d / batch as f64)
            .into_shape_with_order((batch, 1))
            .expect("column reshape");

        let top_h = cache.h_all.last().unwrap();
        let h_last = top_h.slice(s![(t_len - 1) * batch.., ..]);
        let d_head_w = h_last.t().dot(&dzo);
        let d_head_b = dzo.sum_axis(Axis(0));

        // dL/dh stream for the layer being processed, T·B rows. The top
        // layer is hit only at the final step.
        let top_units = *spec.units.last().unwrap();
        let mut dh_all = Array2::zeros((t_len * batch, top_units));
        dh_all
            .slice_mut(s![(t_len - 1) * batch.., ..])
            .assign(&dzo.dot(&self.head_w.t()));

        let mut grads_rev: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let h_dim = layer.u.nrows();
            let gates = &cache.gates[l];
            let c_all = &cache.c_all[l];
            let tanh_c = &cache.tanh_c[l];

            let mut dz_all = Array2::zeros((t_len * batch, 4 * h_dim));
            let mut dh_rec: Array2<f64> = Array2::zeros((batch, h_dim));
            let mut dc_rec: Array2<f64> = Array2::zeros((batch, h_dim));
            for t in (0..t_len).rev() {
                let rows = t * batch..(t + 1) * batch;
                let mut dz_t = dz_all.slice_mut(s![rows.clone(), ..]);
                for bi in 0..batch {
                    let row = t * batch + bi;
                    for j in 0..h_dim {
                        let i_v = gates[(row, j)];
                        let f_v = gates[(row, h_dim + j)];
                        let g_v = gates[(row, 2 * h_dim + j)];
                        let o_v = gates[(row, 3 * h_dim + j)];
                        let th = tanh_c[(row, j)];
                        let c_prev = if t > 0 { c_all[((t - 1) * batch + bi, j)] } else { 0.0 };

                        let dh = dh_all[(row, j)] + dh_rec[(bi, j)];
                        let d_o = dh * th;
                        let dc = dc_rec[(bi, j)] + dh * o_v * (1.0 - th * th);
                        let d_i = dc * g_v;
                        let d_g = dc * i_v;
                        let d_f = dc * c_prev;

                        dz_t[(bi, j)] = d_i * i_v * (1.0 - i_v);
                        dz_t[(bi, h_dim + j)] = d_f * f_v * (1.0 - f_v);
                        dz_t[(bi, 2 * h_dim + j)] = d_g * (1.0 - g_v * g_v);
                        dz_t[(bi, 3 * h_dim + j)] = d_o * o_v * (1.0 - o_v);
                        dc_rec[(bi, j)] = dc * f_v;
                    }
                }
                dh_rec = dz_all.slice(s![rows, ..]).dot(&layer.u.t());
            }

            let dw = cache.x_in[l].t().dot(&dz_all);
            // h_prev at step t (t ≥ 1) is h at step t−1; step 0 sees zeros,
            // so the contraction skips the first block on both sides.
            let h_all = &cache.h_all[l];
            let du = h_all
                .slice(s![..(t_len - 1) * batch, ..])
                .t()
                .dot(&dz_all.slice(s![batch.., ..]));
            let db = dz_all.sum_axis(Axis(0));
            grads_rev.push((dw.into_raw_vec_and_offset().0, du.into_raw_vec_and_offset().0, db.into_raw_vec_and_offset().0));

            if l > 0 {
                let mut dx = dz_all.dot(&layer.w.t());
                if let Some(mask) = &cache.masks[l - 1] {
                    for t in 0..t_len {
                        let mut rows = dx.slice_mut(s![t * batch..(t + 1) * batch, ..]);
                        rows *= mask;
                    }
                }
                dh_all = dx;
            }
        }

        let mut grads = Vec::with_capacity(3 * self.layers.len() + 2);
        for (dw, du, db) in grads_rev.into_iter().rev() {
            grads.push(dw);
            grads.push(du);
            grads.push(db);
        }
        grads.push(d_head_w.into_raw_vec_and_offset().0);
        grads.push(d_head_b.into_raw_vec_and_offset().0);
        grads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn build_default() -> (LstmSpec, LstmParams) {
        let spec = LstmSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = LstmParams::build(&spec, &mut rng);
        (spec, params)
    }

    #[test]
    fn reference_shapes_and_forget_bias() {
        let (_, p) = build_default();
        assert_eq!(p.layers.len(), 3);
        assert_eq!(p.layers[0].w.dim(), (1, 256));
        assert_eq!(p.layers[1].w.dim(), (64, 256));
        assert_eq!(p.layers[2].w.dim(), (64, 256));
        for layer in &p.layers {
            assert_eq!(layer.u.dim(), (64, 256));
            assert_eq!(layer.b.len(), 256);
            assert!(layer.b.slice(s![64..128]).iter().all(|&v| v == 1.0));
            assert!(layer.b.slice(s![..64]).iter().all(|&v| v == 0.0));
            assert!(layer.b.slice(s![128..]).iter().all(|&v| v == 0.0));
        }
        assert_eq!(p.head_w.dim(), (64, 1));
    }

    #[test]
    fn same_seed_builds_identical_parameters() {
        let (_, a) = build_default();
        let (_, b) = build_default();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_parameters_yield_half_probability() {
        let (spec, mut p) = build_default();
        for layer in &mut p.layers {
            layer.w.fill(0.0);
            layer.u.fill(0.0);
            layer.b.fill(0.0);
        }
        p.head_w.fill(0.0);
        let x = Array2::zeros((2, 140));
        let (probs, _) = p.forward(&spec, x.view(), false, 0);
        assert_eq!(probs, array![0.5, 0.5]);
    }

    #[test]
    fn training_forward_is_reproducible_per_seed() {
        let (spec, p) = build_default();
        let x = Array2::from_shape_fn((3, 140), |(i, j)| ((i * 53 + j) % 7) as f64 / 7.0);
        let (a, _) = p.forward(&spec, x.view(), true, 4);
        let (b, _) = p.forward(&spec, x.view(), true, 4);
        let (c, _) = p.forward(&spec, x.view(), true, 5);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn eval_mode_ignores_the_seed() {
        let (spec, p) = build_default();
        let x = Array2::from_shape_fn((2, 140), |(i, j)| ((i + j) % 5) as f64 / 5.0);
        let (a, _) = p.forward(&spec, x.view(), false, 1);
        let (b, _) = p.forward(&spec, x.view(), false, 999);
        assert_eq!(a, b);
    }

    #[test]
    fn sequence_order_matters() {
        // A recurrent reader must distinguish permuted inputs that a bag of
        // counts cannot: reversing the sequence changes the output.
        let (spec, p) = build_default();
        let mut fwd = vec![0.0; 140];
        for (i, v) in fwd.iter_mut().enumerate() {
            *v = (i % 9) as f64 / 9.0;
        }
        let mut rev = fwd.clone();
        rev.reverse();
        let x = Array2::from_shape_vec((2, 140), [fwd, rev].concat()).unwrap();
        let (probs, _) = p.forward(&spec, x.view(), false, 0);
        assert_ne!(probs[0], probs[1]);
    }
}
