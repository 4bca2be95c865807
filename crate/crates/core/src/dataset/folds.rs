use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// (training rows, held-out rows) for one fold, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut held = Vec::new();
        for (r, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                held.push(r);
            } else {
                train.push(r);
            }
        }
        (train, held)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Rows of each class are shuffled with a seed-derived stream and dealt
/// round-robin; the normal class continues dealing where the anomaly class
/// stopped, so fold sizes differ by at most one.
///
/// Every class needs at least `k` rows, except for leave-one-out
/// (`k == n_rows`), which is accepted as long as both classes are present.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    let n = d.n_rows();
    if k < 2 {
        return Err(Error::invalid(format!("fold count must be >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!("{k} folds requested for {n} rows")));
    }
    let (neg, pos) = d.class_counts();
    let smallest = neg.min(pos);
    if smallest == 0 || (smallest < k && k != n) {
        return Err(Error::invalid(format!(
            "class with {smallest} samples cannot be stratified into {k} folds"
        )));
    }
    let mut assignments = vec![0; n];
    let mut next = 0;
    for class in [1u8, 0u8] {
        let mut rows: Vec<usize> = (0..n).filter(|&r| d.labels()[r] == class).collect();
        rows.shuffle(&mut seed::rng(seed::derive(seed, u64::from(class))));
        for r in rows {
            assignments[r] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labeled(labels: Vec<u8>) -> Dataset {
        let rows = (0..labels.len()).map(|i| vec![i as f64]).collect();
        Dataset::from_rows(vec!["x".into()], rows, labels, "f").unwrap()
    }

    #[test]
    fn five_by_five_puts_one_of_each_class_per_fold() {
        let d = labeled(vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1]);
        let plan = stratified_kfold(&d, 5, 3).unwrap();
        for f in 0..5 {
            let (_, held) = plan.split(f);
            assert_eq!(held.len(), 2);
            let pos = held.iter().filter(|&&r| d.labels()[r] == 1).count();
            assert_eq!(pos, 1);
        }
    }

    #[test]
    fn leave_one_out() {
        let d = labeled(vec![0, 1, 0, 1, 1, 0]);
        let plan = stratified_kfold(&d, 6, 1).unwrap();
        assert!(plan.fold_sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn deterministic_per_seed() {
        let d = labeled((0..40).map(|i| (i % 3 == 0) as u8).collect());
        assert_eq!(
            stratified_kfold(&d, 4, 9).unwrap(),
            stratified_kfold(&d, 4, 9).unwrap()
        );
        assert_ne!(
            stratified_kfold(&d, 4, 9).unwrap().assignments,
            stratified_kfold(&d, 4, 10).unwrap().assignments
        );
    }

    #[test]
    fn too_few_class_samples() {
        let d = labeled(vec![0, 0, 0, 0, 0, 1, 1]);
        assert!(stratified_kfold(&d, 3, 0).is_err());
        assert!(stratified_kfold(&d, 1, 0).is_err());
        assert!(stratified_kfold(&labeled(vec![0, 0, 0]), 3, 0).is_err());
    }

    proptest! {
        #[test]
        fn stratification_bound(
            labels in proptest::collection::vec(0u8..2, 20..120),
            k in 2usize..6,
            seed in any::<u64>(),
        ) {
            let d = labeled(labels);
            let (neg, pos) = d.class_counts();
            prop_assume!(neg >= k && pos >= k);
            let plan = stratified_kfold(&d, k, seed).unwrap();
            let global = pos as f64 / d.n_rows() as f64;
            let sizes = plan.fold_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), d.n_rows());
            let ideal = pos as f64 / k as f64;
            for f in 0..k {
                let (_, held) = plan.split(f);
                let fold_pos = held.iter().filter(|&&r| d.labels()[r] == 1).count();
                prop_assert!((fold_pos as f64 - ideal).abs() <= 1.0);
                let frac = fold_pos as f64 / held.len() as f64;
                prop_assert!((frac - global).abs() <= 1.0 / held.len() as f64 + 1e-12);
            }
        }
    }
}
