//! Confusion counts and the derived metric suite. Ransomware (label 0) is
//! the positive class throughout: a "false alarm" is a benign trace flagged
//! as ransomware.

use crate::EvalError;
use evcs_features::Label;
use serde::{Deserialize, Serialize};

/// Binary confusion counts with ransomware as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Threshold the model's normal-class probabilities into a confusion
/// matrix. A row is predicted ransomware iff its score is strictly below
/// the threshold, so exact ties go to the normal class.
pub fn confusion_at(
    scores: &[f64],
    labels: &[Label],
    threshold: f64,
) -> Result<Confusion, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut c = Confusion { tp: 0, fp: 0, tn: 0, fn_: 0 };
    for (&s, &l) in scores.iter().zip(labels.iter()) {
        let predicted_ransomware = s < threshold;
        let is_ransomware = l == Label::Ransomware;
        match (predicted_ransomware, is_ransomware) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// The metric suite over a confusion matrix. Ratios whose denominator is
/// zero are defined as 0 and recorded in `degenerate` rather than raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub acc: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub far: f64,
    pub degenerate: Vec<String>,
}

pub fn metrics(c: &Confusion) -> MetricSet {
    let n = c.n() as f64;
    let mut degenerate = Vec::new();
    let mut ratio = |name: &str, num: usize, den: usize| -> f64 {
        if den == 0 {
            degenerate.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let acc = (c.tp + c.tn) as f64 / n;
    let precision = ratio("precision", c.tp, c.tp + c.fp);
    let recall = ratio("recall", c.tp, c.tp + c.fn_);
    let far = ratio("far", c.fp, c.fp + c.tn);
    let f1 = if precision + recall == 0.0 {
        degenerate.push("f1".to_string());
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricSet { acc, precision, recall, f1, far, degenerate }
}

/// Rank-based AUC (Mann-Whitney with midrank tie correction). Here a
/// *higher* score must mean more ransomware-like, and ransomware rows are
/// the positives; callers holding normal-class probabilities should pass
/// their complement.
pub fn roc_auc(scores: &[f64], labels: &[Label]) -> Result<f64, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let pos = labels.iter().filter(|&&l| l == Label::Ransomware).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }

    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Midranks: tied runs share the average of the ranks they occupy.
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        for t in i..=j {
            ranks[order[t]] = midrank;
        }
        i = j + 1;
    }

    let rank_sum: f64 = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == Label::Ransomware)
        .map(|(i, _)| ranks[i])
        .sum();
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Normal, Ransomware};

    #[test]
    fn perfect_scores_fill_the_diagonal() {
        let c = confusion_at(&[0.1, 0.9], &[Ransomware, Normal], 0.5).unwrap();
        assert_eq!(c, Confusion { tp: 1, fp: 0, tn: 1, fn_: 0 });
    }

    #[test]
    fn inverted_scores_fill_the_off_diagonal() {
        let c = confusion_at(&[0.9, 0.1], &[Ransomware, Normal], 0.5).unwrap();
        assert_eq!(c, Confusion { tp: 0, fp: 1, tn: 0, fn_: 1 });
    }

    #[test]
    fn threshold_ties_predict_normal() {
        let c = confusion_at(&[0.5, 0.5, 0.5], &[Ransomware, Normal, Normal], 0.5).unwrap();
        assert_eq!(c, Confusion { tp: 0, fp: 0, tn: 2, fn_: 1 });
    }

    #[test]
    fn length_mismatch_and_empty_input_are_rejected() {
        assert!(matches!(
            confusion_at(&[0.5], &[], 0.5),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(confusion_at(&[], &[], 0.5), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn high_recall_low_far_regime() {
        let c = Confusion { tp: 97, fn_: 3, tn: 99, fp: 1 };
        let m = metrics(&c);
        assert!((m.acc - 0.98).abs() < 1e-12);
        assert!((m.precision - 97.0 / 98.0).abs() < 1e-12);
        assert!((m.recall - 0.97).abs() < 1e-12);
        assert!((m.far - 0.01).abs() < 1e-12);
        let p = 97.0 / 98.0;
        let r = 0.97;
        assert!((m.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
        assert!(m.degenerate.is_empty());
    }

    #[test]
    fn perfect_confusion_maxes_every_metric() {
        let m = metrics(&Confusion { tp: 10, fp: 0, tn: 10, fn_: 0 });
        assert_eq!((m.acc, m.precision, m.recall, m.f1, m.far), (1.0, 1.0, 1.0, 1.0, 0.0));
        assert!(m.degenerate.is_empty());
    }

    #[test]
    fn zero_over_zero_is_zero_and_flagged() {
        let m = metrics(&Confusion { tp: 0, fp: 0, tn: 5, fn_: 5 });
        assert_eq!(m.precision, 0.0);
        assert!(m.degenerate.iter().any(|d| d == "precision"));
        assert_eq!(m.f1, 0.0);
        assert!(m.degenerate.iter().any(|d| d == "f1"));
    }

    #[test]
    fn separated_scores_reach_full_auc() {
        let auc = roc_auc(&[0.9, 0.8, 0.2, 0.1], &[Ransomware, Ransomware, Normal, Normal]);
        assert_eq!(auc.unwrap(), 1.0);
    }

    #[test]
    fn constant_scores_sit_at_chance() {
        let auc = roc_auc(&[0.4; 6], &[Ransomware, Normal, Ransomware, Normal, Normal, Ransomware]);
        assert_eq!(auc.unwrap(), 0.5);
    }

    #[test]
    fn worked_four_point_example() {
        let auc = roc_auc(
            &[0.9, 0.6, 0.65, 0.2],
            &[Ransomware, Ransomware, Normal, Normal],
        );
        assert_eq!(auc.unwrap(), 0.75);
    }

    #[test]
    fn single_class_input_is_rejected() {
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[Normal, Normal]),
            Err(EvalError::SingleClass)
        ));
        assert!(matches!(
            roc_auc(&[0.1, f64::NAN], &[Ransomware, Normal]),
            Err(EvalError::NonFiniteScore(1))
        ));
    }
}
