//! Fully connected classifier: ReLU hidden layers, one sigmoid output.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand_chacha::ChaCha8Rng;

use crate::model::init_weight;
use crate::sigmoid;
use crate::spec::DnnSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct DnnParams {
    /// Hidden layers in order: (weights in_dim×out_dim, bias out_dim).
    pub layers: Vec<(Array2<f64>, Array1<f64>)>,
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
}

pub(crate) struct DnnCache {
    /// Input and each hidden activation, length = hidden count + 1.
    acts: Vec<Array2<f64>>,
    /// Hidden pre-activations, for the ReLU masks.
    zs: Vec<Array2<f64>>,
}

impl DnnParams {
    pub(crate) fn build(spec: &DnnSpec, rng: &mut ChaCha8Rng) -> DnnParams {
        let mut layers = Vec::with_capacity(spec.hidden.len());
        let mut fan_in = spec.input;
        for &h in &spec.hidden {
            layers.push((init_weight(rng, fan_in, h), Array1::zeros(h)));
            fan_in = h;
        }
        DnnParams {
            layers,
            out_w: init_weight(rng, fan_in, 1),
            out_b: Array1::zeros(1),
        }
    }

    pub(crate) fn forward(&self, x: ArrayView2<f64>) -> (Array1<f64>, DnnCache) {
        let mut acts = vec![x.to_owned()];
        let mut zs = Vec::with_capacity(self.layers.len());
        for (w, b) in &self.layers {
            let z = acts.last().unwrap().dot(w) + b;
            acts.push(z.mapv(|v| v.max(0.0)));
            zs.push(z);
        }
        let zo = acts.last().unwrap().dot(&self.out_w) + &self.out_b;
        let probs = zo.column(0).mapv(sigmoid);
        (probs, DnnCache { acts, zs })
    }

    /// Gradients of mean BCE w.r.t. every tensor, in [`tensor order`]:
    /// (w, b) per hidden layer, then out_w, out_b.
    pub(crate) fn backward(
        &self,
        cache: &DnnCache,
        probs: &Array1<f64>,
        labels: ArrayView1<f64>,
    ) -> Vec<Vec<f64>> {
        let batch = probs.len() as f64;
        // d mean-BCE / d output-pre-activation, shape B×1.
        let dzo = (probs - &labels)
            .mapv(|d| d / batch)
            .into_shape_with_order((probs.len(), 1))
            .expect("column reshape");

        let last_act = cache.acts.last().unwrap();
        let d_out_w = last_act.t().dot(&dzo);
        let d_out_b = dzo.sum_axis(Axis(0));

        let mut d_layers = vec![(Array2::zeros((0, 0)), Array1::zeros(0)); self.layers.len()];
        let mut da = dzo.dot(&self.out_w.t());
        for k in (0..self.layers.len()).rev() {
            let dz = &da * &cache.zs[k].mapv(|z| if z > 0.0 { 1.0 } else { 0.0 });
            d_layers[k] = (cache.acts[k].t().dot(&dz), dz.sum_axis(Axis(0)));
            if k > 0 {
                da = dz.dot(&self.layers[k].0.t());
            }
        }

        let mut grads = Vec::with_capacity(2 * self.layers.len() + 2);
        for (dw, db) in d_layers {
            grads.push(dw.into_raw_vec_and_offset().0);
            grads.push(db.into_raw_vec_and_offset().0);
        }
        grads.push(d_out_w.into_raw_vec_and_offset().0);
        grads.push(d_out_b.into_raw_vec_and_offset().0);
        grads
    }
}
