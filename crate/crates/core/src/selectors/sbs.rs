use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eliminate, EliminationTrace, SelectorConfig, SelectorKind};
use crate::dataset::{stratified_kfold, Dataset};
use crate::error::Result;
use crate::evaluation::cross_val_score_with_plan;
use crate::features::FeatureSet;
use crate::learners::{ForestConfig, LearnerConfig};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SbsConfig {
    /// Stratified folds of the criterion.
    pub folds: usize,
    /// Criterion learner.
    pub learner: LearnerConfig,
}

impl Default for SbsConfig {
    fn default() -> Self {
        SbsConfig {
            folds: 3,
            learner: LearnerConfig::Rf(ForestConfig::with_trees(25)),
        }
    }
}

/// Sequential backward selection. Each iteration scores every candidate
/// removal by mean cross-validated F1 on the remaining features and performs
/// the removal with the highest score (ties to the lower id). One fold plan
/// is shared by the whole trace; each (iteration, candidate) pair gets its
/// own learner seed.
pub fn sbs_trace(
    d: &Dataset,
    features: &FeatureSet,
    seed: u64,
    config: &SelectorConfig,
) -> Result<EliminationTrace> {
    let sbs = &config.sbs;
    let plan = if features.len() > 1 {
        Some(stratified_kfold(d, sbs.folds, seed::derive_str(seed, "folds"))?)
    } else {
        None
    };
    eliminate(SelectorKind::Sbs, d, features, seed, config, |t, surviving| {
        let plan = plan.as_ref().expect("plan exists whenever an iteration runs");
        let iter_seed = seed::derive(seed, t as u64);
        let candidates = surviving.to_vec();
        let scored: Vec<(usize, f64)> = candidates
            .par_iter()
            .map(|&id| {
                let learner = sbs.learner.with_seed(seed::derive(iter_seed, id as u64));
                let score = cross_val_score_with_plan(d, &surviving.without(id), &learner, plan)?
                    .map(|s| s.mean)
                    .unwrap_or(0.0);
                Ok((id, score))
            })
            .collect::<Result<_>>()?;
        let (id, best) = scored
            .iter()
            .copied()
            .fold(None, |acc: Option<(usize, f64)>, (id, s)| match acc {
                Some((_, bs)) if bs >= s => acc,
                _ => Some((id, s)),
            })
            .expect("surviving set is nonempty");
        Ok((id, best, candidates.len() * plan.k))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::fixtures::label_copy;

    fn small() -> SelectorConfig {
        SelectorConfig {
            sbs: SbsConfig {
                folds: 3,
                learner: LearnerConfig::Rf(ForestConfig::with_trees(10)),
            },
            ..Default::default()
        }
    }

    #[test]
    fn single_feature_has_empty_order() {
        let d = label_copy(30, 2, 1);
        let t = sbs_trace(&d, &[1].into_iter().collect(), 0, &small()).unwrap();
        assert!(t.order.is_empty());
    }

    #[test]
    fn noise_is_removed_next_to_a_perfect_feature() {
        let d = label_copy(90, 1, 6);
        let t = sbs_trace(&d, &d.all_features(), 3, &small()).unwrap();
        assert_eq!(t.order, vec![1]);
        assert_eq!(t.scores, vec![1.0]);
    }

    #[test]
    fn criterion_model_count() {
        let d = label_copy(90, 4, 7);
        let cfg = small();
        let t = sbs_trace(&d, &d.all_features(), 3, &cfg).unwrap();
        t.validate().unwrap();
        let expected: Vec<usize> = (2..=5).rev().map(|s| s * cfg.sbs.folds).collect();
        assert_eq!(t.model_fits, expected);
        assert_eq!(t.surviving(4).unwrap().to_vec(), vec![0]);
    }
}
