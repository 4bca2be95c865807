use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::f1_score;
use crate::dataset::{stratified_kfold, Dataset, FoldPlan};
use crate::error::Result;
use crate::features::FeatureSet;
use crate::learners::{confusion, LearnerConfig};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean: f64,
    /// Population standard deviation over folds.
    pub stdev: f64,
}

/// Mean and spread of F1 over stratified folds of the training set.
/// Returns `None` (skipped) for an empty feature set.
pub fn cross_val_score(
    d: &Dataset,
    features: &FeatureSet,
    learner: &LearnerConfig,
    folds: usize,
    seed: u64,
) -> Result<Option<CvScore>> {
    if features.is_empty() {
        return Ok(None);
    }
    let plan = stratified_kfold(d, folds, seed::derive_str(seed, "folds"))?;
    let learner = learner.with_seed(seed::derive_str(seed, "learner"));
    cross_val_score_with_plan(d, features, &learner, &plan)
}

/// Cross-validation over a fixed fold plan. The model of fold `i` is seeded
/// with `(learner.seed, i)`.
pub fn cross_val_score_with_plan(
    d: &Dataset,
    features: &FeatureSet,
    learner: &LearnerConfig,
    plan: &FoldPlan,
) -> Result<Option<CvScore>> {
    if features.is_empty() {
        return Ok(None);
    }
    let scores: Vec<f64> = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let (train_rows, held_rows) = plan.split(fold);
            let train = d.subset_rows(&train_rows);
            let held = d.subset_rows(&held_rows);
            let model = learner
                .with_seed(seed::derive(learner.seed(), fold as u64))
                .fit(&train, features)?;
            let pred = model.predict(&held, features)?;
            Ok(f1_score(&confusion(held.labels(), &pred)?))
        })
        .collect::<Result<_>>()?;
    let k = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / k;
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / k;
    Ok(Some(CvScore {
        mean,
        stdev: var.sqrt(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{ForestConfig, LogRegConfig};
    use crate::selectors::fixtures::label_copy;

    fn rf() -> LearnerConfig {
        LearnerConfig::Rf(ForestConfig::with_trees(10))
    }

    #[test]
    fn perfect_feature_scores_one() {
        let d = label_copy(100, 3, 1);
        let s = cross_val_score(&d, &[0].into_iter().collect(), &rf(), 5, 7).unwrap().unwrap();
        assert_eq!(s, CvScore { mean: 1.0, stdev: 0.0 });
        let lr = LearnerConfig::Lr(LogRegConfig::default());
        let s = cross_val_score(&d, &[0].into_iter().collect(), &lr, 5, 7).unwrap().unwrap();
        assert_eq!(s.mean, 1.0);
    }

    #[test]
    fn empty_set_is_skipped() {
        let d = label_copy(30, 1, 1);
        assert!(cross_val_score(&d, &FeatureSet::new(), &rf(), 3, 0).unwrap().is_none());
    }

    #[test]
    fn noise_scores_within_bounds_and_repeats() {
        let d = label_copy(120, 3, 2);
        let f: FeatureSet = [1, 2, 3].into_iter().collect();
        let a = cross_val_score(&d, &f, &rf(), 4, 3).unwrap().unwrap();
        let b = cross_val_score(&d, &f, &rf(), 4, 3).unwrap().unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.mean) && a.stdev >= 0.0);
        assert!(a.mean < 0.9);
    }

    #[test]
    fn too_many_folds_is_an_error() {
        let d = label_copy(10, 1, 2);
        assert!(cross_val_score(&d, &[0].into_iter().collect(), &rf(), 7, 0).is_err());
    }
}
