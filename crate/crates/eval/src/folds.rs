//! Seeded stratified index splits: round-robin k-folds and a fixed
//! 40/30/30 train/validation/test partition.

use crate::EvalError;
use evcs_features::Label;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Shuffled per-class index lists, ransomware first. One generator drives
/// both shuffles so the result is a pure function of (labels, seed).
fn shuffled_classes(labels: &[Label], seed: u64) -> [Vec<usize>; 2] {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l.as_int() as usize].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for class in by_class.iter_mut() {
        class.shuffle(&mut rng);
    }
    by_class
}

/// Partition indices into k folds whose per-class counts stay within one
/// row of exact proportionality. Each class is shuffled, then dealt
/// round-robin across the folds.
pub fn stratified_folds(
    labels: &[Label],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    let by_class = shuffled_classes(labels, seed);
    for (label, class) in by_class.iter().enumerate() {
        if class.len() < k {
            return Err(EvalError::ClassTooSmall { label: label as i64, count: class.len(), k });
        }
    }
    let mut folds = vec![Vec::new(); k];
    for class in &by_class {
        for (i, &idx) in class.iter().enumerate() {
            folds[i % k].push(idx);
        }
    }
    Ok(folds)
}

/// Largest-remainder apportionment of `target` slots across class sizes.
fn apportion(sizes: &[usize], target: usize) -> Vec<usize> {
    let total: usize = sizes.iter().sum();
    let mut shares: Vec<usize> = Vec::with_capacity(sizes.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(sizes.len());
    let mut assigned = 0;
    for (i, &s) in sizes.iter().enumerate() {
        let quota = target as f64 * s as f64 / total as f64;
        let floor = quota.floor() as usize;
        shares.push(floor);
        assigned += floor;
        fractions.push((i, quota - floor as f64));
    }
    // Hand leftover slots to the largest fractional parts; ties go to the
    // lower class index for determinism.
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(i, _) in fractions.iter().take(target - assigned) {
        shares[i] += 1;
    }
    shares
}

/// Stratified three-way split with sizes round(0.4N) / round(0.3N) /
/// remainder. Class shares within each part follow largest-remainder
/// apportionment of those global sizes.
pub fn split_40_30_30(
    labels: &[Label],
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>), EvalError> {
    let n = labels.len();
    if n < 10 {
        return Err(EvalError::TooFewRows { got: n, need: 10 });
    }
    let by_class = shuffled_classes(labels, seed);
    let sizes = [by_class[0].len(), by_class[1].len()];

    let train_target = (0.4 * n as f64).round() as usize;
    let val_target = (0.3 * n as f64).round() as usize;
    let train_share = apportion(&sizes, train_target);
    let val_share = apportion(&sizes, val_target);

    let mut train = Vec::new();
    let mut val = Vec::new();
    let mut test = Vec::new();
    for (c, class) in by_class.iter().enumerate() {
        let t = train_share[c];
        let v = val_share[c];
        train.extend_from_slice(&class[..t]);
        val.extend_from_slice(&class[t..t + v]);
        test.extend_from_slice(&class[t + v..]);
    }
    Ok((train, val, test))
}
