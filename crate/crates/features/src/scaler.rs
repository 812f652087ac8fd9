//! Per-feature scaling fitted on training data and replayed at inference.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::{FeatureError, FEATURE_DIM};

/// Which normalization to fit. Min-max to [0, 1] is the default; the
/// z-score variant is kept for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerModel {
    MinMax,
    Standard,
}

impl Default for ScalerModel {
    fn default() -> Self {
        ScalerModel::MinMax
    }
}

/// Fitted per-feature parameters. For min-max these are (min, max); for the
/// standard scaler they are (mean, std).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub kind: ScalerModel,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ScalerParams {
    /// Transform one vector in place.
    ///
    /// Min-max maps the fitted range onto [0, 1], sends constant features to
    /// 0 and clamps values outside the fitted range. Standard scaling leaves
    /// zero-variance features at 0.
    pub fn apply(&self, values: &mut [f64]) {
        debug_assert_eq!(values.len(), FEATURE_DIM);
        for (i, v) in values.iter_mut().enumerate() {
            *v = match self.kind {
                ScalerModel::MinMax => {
                    let span = self.hi[i] - self.lo[i];
                    if span <= 0.0 {
                        0.0
                    } else {
                        ((*v - self.lo[i]) / span).clamp(0.0, 1.0)
                    }
                }
                ScalerModel::Standard => {
                    if self.hi[i] <= 0.0 {
                        0.0
                    } else {
                        (*v - self.lo[i]) / self.hi[i]
                    }
                }
            };
        }
    }

    pub fn apply_dataset(&self, data: &mut Dataset) {
        for row in &mut data.rows {
            self.apply(&mut row.values);
        }
    }
}

/// Fit scaling parameters on a dataset (normally the training split only).
pub fn fit_scaler(data: &Dataset, kind: ScalerModel) -> Result<ScalerParams, FeatureError> {
    if data.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    let n = data.len() as f64;
    let mut lo = vec![0.0; FEATURE_DIM];
    let mut hi = vec![0.0; FEATURE_DIM];
    match kind {
        ScalerModel::MinMax => {
            lo.copy_from_slice(&data.rows[0].values);
            hi.copy_from_slice(&data.rows[0].values);
            for row in &data.rows[1..] {
                for i in 0..FEATURE_DIM {
                    lo[i] = lo[i].min(row.values[i]);
                    hi[i] = hi[i].max(row.values[i]);
                }
            }
        }
        ScalerModel::Standard => {
            for row in &data.rows {
                for i in 0..FEATURE_DIM {
                    lo[i] += row.values[i];
                }
            }
            for m in lo.iter_mut() {
                *m /= n;
            }
            for row in &data.rows {
                for i in 0..FEATURE_DIM {
                    let d = row.values[i] - lo[i];
                    hi[i] += d * d;
                }
            }
            for s in hi.iter_mut() {
                *s = (*s / n).sqrt();
            }
        }
    }
    Ok(ScalerParams { kind, lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{FeatureVector, Label};
    use crate::layout::FeatureLayout;

    fn tiny_dataset(cols: &[(usize, &[f64])]) -> Dataset {
        let n = cols[0].1.len();
        let mut rows = Vec::new();
        for r in 0..n {
            let mut v = vec![0.0; FEATURE_DIM];
            for (slot, series) in cols {
                v[*slot] = series[r];
            }
            rows.push(FeatureVector::new(v, Label::Normal).unwrap());
        }
        Dataset { rows, layout: FeatureLayout::default_layout().clone() }
    }

    #[test]
    fn min_max_maps_range_onto_unit_interval() {
        let data = tiny_dataset(&[(0, &[2.0, 4.0, 10.0])]);
        let params = fit_scaler(&data, ScalerModel::MinMax).unwrap();
        let mut v = vec![0.0; FEATURE_DIM];
        v[0] = 4.0;
        params.apply(&mut v);
        assert!((v[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_features_scale_to_zero() {
        let data = tiny_dataset(&[(3, &[7.0, 7.0, 7.0])]);
        let params = fit_scaler(&data, ScalerModel::MinMax).unwrap();
        let mut v = vec![0.0; FEATURE_DIM];
        v[3] = 7.0;
        params.apply(&mut v);
        assert_eq!(v[3], 0.0);
    }

    #[test]
    fn out_of_range_values_clamp() {
        let data = tiny_dataset(&[(5, &[0.0, 10.0])]);
        let params = fit_scaler(&data, ScalerModel::MinMax).unwrap();
        let mut v = vec![0.0; FEATURE_DIM];
        v[5] = 25.0;
        params.apply(&mut v);
        assert_eq!(v[5], 1.0);
        v[5] = -3.0;
        params.apply(&mut v);
        assert_eq!(v[5], 0.0);
    }

    #[test]
    fn standard_scaler_centers_and_divides() {
        let data = tiny_dataset(&[(1, &[1.0, 3.0])]);
        let params = fit_scaler(&data, ScalerModel::Standard).unwrap();
        // mean 2, population std 1
        let mut v = vec![0.0; FEATURE_DIM];
        v[1] = 3.0;
        params.apply(&mut v);
        assert!((v[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = Dataset { rows: vec![], layout: FeatureLayout::default_layout().clone() };
        assert!(fit_scaler(&data, ScalerModel::MinMax).is_err());
    }
}
