//! Architecture-independent model wrapper: construction, tensor access and
//! forward/backward dispatch.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnn::{CnnCache, CnnParams};
use crate::dnn::{DnnCache, DnnParams};
use crate::lstm::{LstmCache, LstmParams};
use crate::spec::ModelSpec;
use crate::NnError;

/// Fan-in-scaled uniform initialization, U(−1/√fan_in, 1/√fan_in), drawn
/// row-major so a seed fixes every parameter.
pub(crate) fn init_weight(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = 1.0 / (rows as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..=bound))
}

/// Read-only view of one parameter tensor.
pub struct TensorView<'a> {
    pub name: String,
    /// True for multiplicative weights (L1/L2 applies), false for biases.
    pub is_weight: bool,
    pub data: &'a [f64],
}

/// Mutable view of one parameter tensor.
pub struct TensorViewMut<'a> {
    pub name: String,
    pub is_weight: bool,
    pub data: &'a mut [f64],
}

/// Per-tensor gradient buffers, aligned with [`Model::tensors`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Arch {
    Dnn(DnnParams),
    Cnn(CnnParams),
    Lstm(LstmParams),
}

pub(crate) enum ArchCache {
    Dnn(DnnCache),
    Cnn(CnnCache),
    Lstm(LstmCache),
}

/// A built classifier: spec, provenance seed and parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    seed: u64,
    arch: Arch,
}

impl Model {
    /// Deterministically initialize parameters for a spec.
    pub fn build(spec: &ModelSpec, seed: u64) -> Result<Model, NnError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arch = match spec {
            ModelSpec::Dnn(s) => Arch::Dnn(DnnParams::build(s, &mut rng)),
            ModelSpec::Cnn1d(s) => Arch::Cnn(CnnParams::build(s, &mut rng)),
            ModelSpec::Lstm(s) => Arch::Lstm(LstmParams::build(s, &mut rng)),
        };
        Ok(Model { spec: spec.clone(), seed, arch })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Seed the parameters were initialized from (provenance only; training
    /// moves the values).
    pub fn init_seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn check_input(&self, x: ArrayView2<f64>) -> Result<(), NnError> {
        let want = self.spec.input_width();
        if x.ncols() != want {
            return Err(NnError::ShapeMismatch {
                expected: format!("B×{want} input"),
                got: format!("{}×{}", x.nrows(), x.ncols()),
            });
        }
        Ok(())
    }

    /// Class probabilities P(label = 1) for a batch. `training` enables
    /// dropout with masks derived from `seed`; inference ignores the seed.
    pub fn forward(
        &self,
        x: ArrayView2<f64>,
        training: bool,
        seed: u64,
    ) -> Result<Array1<f64>, NnError> {
        self.check_input(x)?;
        Ok(self.forward_cached(x, training, seed).0)
    }

    pub(crate) fn forward_cached(
        &self,
        x: ArrayView2<f64>,
        training: bool,
        seed: u64,
    ) -> (Array1<f64>, ArchCache) {
        match (&self.arch, &self.spec) {
            (Arch::Dnn(p), _) => {
                let (probs, cache) = p.forward(x);
                (probs, ArchCache::Dnn(cache))
            }
            (Arch::Cnn(p), ModelSpec::Cnn1d(s)) => {
                let (probs, cache) = p.forward(s, x, training, seed);
                (probs, ArchCache::Cnn(cache))
            }
            (Arch::Lstm(p), ModelSpec::Lstm(s)) => {
                let (probs, cache) = p.forward(s, x, training, seed);
                (probs, ArchCache::Lstm(cache))
            }
            _ => unreachable!("spec and parameters are constructed together"),
        }
    }

    pub(crate) fn backward_cached(
        &self,
        cache: &ArchCache,
        probs: &Array1<f64>,
        labels: ArrayView1<f64>,
    ) -> Vec<Vec<f64>> {
        match (&self.arch, &self.spec, cache) {
            (Arch::Dnn(p), _, ArchCache::Dnn(c)) => p.backward(c, probs, labels),
            (Arch::Cnn(p), ModelSpec::Cnn1d(s), ArchCache::Cnn(c)) => {
                p.backward(s, c, probs, labels)
            }
            (Arch::Lstm(p), ModelSpec::Lstm(s), ArchCache::Lstm(c)) => {
                p.backward(s, c, probs, labels)
            }
            _ => unreachable!("cache comes from this model's forward pass"),
        }
    }

    /// Parameter tensors in declaration order — the order gradients,
    /// optimizer state and the serialized container all use.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        fn view(name: String, is_weight: bool, data: &[f64]) -> TensorView<'_> {
            TensorView { name, is_weight, data }
        }
        let mut v = Vec::new();
        match &self.arch {
            Arch::Dnn(p) => {
                for (k, (w, b)) in p.layers.iter().enumerate() {
                    v.push(view(format!("fc{}_w", k + 1), true, w.as_slice().unwrap()));
                    v.push(view(format!("fc{}_b", k + 1), false, b.as_slice().unwrap()));
                }
                v.push(view("out_w".into(), true, p.out_w.as_slice().unwrap()));
                v.push(view("out_b".into(), false, p.out_b.as_slice().unwrap()));
            }
            Arch::Cnn(p) => {
                for (k, (w, b)) in p.conv.iter().enumerate() {
                    v.push(view(format!("conv{}_w", k + 1), true, w.as_slice().unwrap()));
                    v.push(view(format!("conv{}_b", k + 1), false, b.as_slice().unwrap()));
                }
                v.push(view("fc_w".into(), true, p.fc_w.as_slice().unwrap()));
                v.push(view("fc_b".into(), false, p.fc_b.as_slice().unwrap()));
                v.push(view("out_w".into(), true, p.out_w.as_slice().unwrap()));
                v.push(view("out_b".into(), false, p.out_b.as_slice().unwrap()));
            }
            Arch::Lstm(p) => {
                for (k, layer) in p.layers.iter().enumerate() {
                    v.push(view(format!("lstm{}_w", k + 1), true, layer.w.as_slice().unwrap()));
                    v.push(view(format!("lstm{}_u", k + 1), true, layer.u.as_slice().unwrap()));
                    v.push(view(format!("lstm{}_b", k + 1), false, layer.b.as_slice().unwrap()));
                }
                v.push(view("head_w".into(), true, p.head_w.as_slice().unwrap()));
                v.push(view("head_b".into(), false, p.head_b.as_slice().unwrap()));
            }
        }
        v
    }

    /// Mutable variant of [`Model::tensors`], same order.
    pub fn tensors_mut(&mut self) -> Vec<TensorViewMut<'_>> {
        let mut v = Vec::new();
        match &mut self.arch {
            Arch::Dnn(p) => {
                for (k, (w, b)) in p.layers.iter_mut().enumerate() {
                    v.push(TensorViewMut {
                        name: format!("fc{}_w", k + 1),
                        is_weight: true,
                        data: w.as_slice_mut().unwrap(),
                    });
                    v.push(TensorViewMut {
                        name: format!("fc{}_b", k + 1),
                        is_weight: false,
                        data: b.as_slice_mut().unwrap(),
                    });
                }
                v.push(TensorViewMut {
                    name: "out_w".into(),
                    is_weight: true,
                    data: p.out_w.as_slice_mut().unwrap(),
                });
                v.push(TensorViewMut {
                    name: "out_b".into(),
                    is_weight: false,
                    data: p.out_b.as_slice_mut().unwrap(),
                });
            }
            Arch::Cnn(p) => {
                for (k, (w, b)) in p.conv.iter_mut().enumerate() {
                    v.push(TensorViewMut {
                        name: format!("conv{}_w", k + 1),
                        is_weight: true,
                        data: w.as_slice_mut().unwrap(),
                    });
                    v.push(TensorViewMut {
                        name: format!("conv{}_b", k + 1),
                        is_weight: false,
                        data: b.as_slice_mut().unwrap(),
                    });
                }
                v.push(TensorViewMut {
                    name: "fc_w".into(),
                    is_weight: true,
                    data: p.fc_w.as_slice_mut().unwrap(),
                });
                v.push(TensorViewMut {
                    name: "fc_b".into(),
                    is_weight: false,
                    data: p.fc_b.as_slice_mut().unwrap(),
                });
                v.push(TensorViewMut {
                    name: "out_w".into(),
                    is_weight: true,
                    data: p.out_w.as_slice_mut().unwrap(),
                });
                v.push(TensorViewMut {
                    name: "out_b".into(),
                    is_weight: false,
                    data: p.out_b.as_slice_mut().unwrap(),
                });
            }
            Arch::Lstm(p) => {
                for (k, layer) in p.layers.iter_mut().enumerate() {
                    v.push(TensorViewMut {
                        name: format!("lstm{}_w", k + 1),
                        is_weight: true,
                        data: layer.w.as_slice_mut().unwrap(),
                    });
                    v.push(TensorViewMut {
                        name: format!("lstm{}_u", k + 1),
                        is_weight: true,
                        data: layer.u.as_slice_mut().unwrap(),
                    });
                    v.push(TensorViewMut {
                        name: format!("lstm{}_b", k + 1),
                        is_weight: false,
                        data: layer.b.as_slice_mut().unwrap(),
                    });
                }
                v.push(TensorViewMut {
                    name: "head_w".into(),
                    is_weight: true,
                    data: p.head_w.as_slice_mut().unwrap(),
                });
                v.push(TensorViewMut {
                    name: "head_b".into(),
                    is_weight: false,
                    data: p.head_b.as_slice_mut().unwrap(),
                });
            }
        }
        v
    }

    /// Total parameter count.
    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn tensor_and_mut_orders_agree() {
        for spec in [ModelSpec::dnn(), ModelSpec::cnn1d(), ModelSpec::lstm()] {
            let mut m = Model::build(&spec, 1).unwrap();
            let names: Vec<String> = m.tensors().iter().map(|t| t.name.clone()).collect();
            let weight_flags: Vec<bool> = m.tensors().iter().map(|t| t.is_weight).collect();
            let lens: Vec<usize> = m.tensors().iter().map(|t| t.data.len()).collect();
            let muts = m.tensors_mut();
            assert_eq!(names, muts.iter().map(|t| t.name.clone()).collect::<Vec<_>>());
            assert_eq!(weight_flags, muts.iter().map(|t| t.is_weight).collect::<Vec<_>>());
            assert_eq!(lens, muts.iter().map(|t| t.data.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn parameter_counts_are_stable() {
        // 140·64 + 64 + 64·64 + 64 + 64·1 + 1
        assert_eq!(Model::build(&ModelSpec::dnn(), 0).unwrap().param_count(), 13249);
        // conv 3·64+64 + 192·64+64 + fc 2112·128+128 + out 128+1
        assert_eq!(Model::build(&ModelSpec::cnn1d(), 0).unwrap().param_count(), 283201);
        // 3 layers of (in·256 + 64·256 + 256) with in = 1, 64, 64, + head 65
        assert_eq!(
            Model::build(&ModelSpec::lstm(), 0).unwrap().param_count(),
            (256 + 16384 + 256) + 2 * (16384 + 16384 + 256) + 65
        );
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let m = Model::build(&ModelSpec::dnn(), 0).unwrap();
        let x = Array2::zeros((4, 139));
        assert!(matches!(
            m.forward(x.view(), false, 0),
            Err(NnError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn batch_of_100_yields_100_interior_probabilities() {
        for spec in [ModelSpec::dnn(), ModelSpec::cnn1d(), ModelSpec::lstm()] {
            let m = Model::build(&spec, 7).unwrap();
            let x = Array2::from_shape_fn((100, 140), |(i, j)| ((i * 31 + j * 7) % 10) as f64 / 10.0);
            let probs = m.forward(x.view(), false, 0).unwrap();
            assert_eq!(probs.len(), 100);
            assert!(probs.iter().all(|&p| p > 0.0 && p < 1.0));
        }
    }

    #[test]
    fn invalid_spec_fails_to_build() {
        let spec = ModelSpec::Dnn(crate::spec::DnnSpec { hidden: vec![], ..Default::default() });
        assert!(Model::build(&spec, 0).is_err());
    }
}
