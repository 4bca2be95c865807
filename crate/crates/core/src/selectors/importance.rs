use super::{argmin_first, eliminate, EliminationTrace, SelectorConfig, SelectorKind};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::features::FeatureSet;
use crate::learners::{train_random_forest, ForestConfig};
use crate::seed;

/// Retrains a forest on the surviving set every iteration and drops the
/// feature with the smallest Gini importance.
pub fn importance_trace(
    d: &Dataset,
    features: &FeatureSet,
    seed: u64,
    config: &SelectorConfig,
) -> Result<EliminationTrace> {
    eliminate(SelectorKind::Importance, d, features, seed, config, |t, surviving| {
        let cfg = ForestConfig {
            seed: seed::derive(seed, t as u64),
            ..config.importance.clone()
        };
        let forest = train_random_forest(d, surviving, &cfg)?;
        let ranked: Vec<(usize, f64)> = forest
            .features
            .iter()
            .copied()
            .zip(forest.importances.iter().copied())
            .collect();
        let (id, imp) = argmin_first(&ranked).expect("surviving set is nonempty");
        Ok((id, imp, 1))
    })
}
