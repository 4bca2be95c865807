use super::{argmin_first, eliminate, EliminationTrace, SelectorConfig, SelectorKind};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::features::FeatureSet;
use crate::learners::{train_logreg, LogRegConfig};
use crate::seed;

/// Recursive feature elimination: refit logistic regression on the surviving
/// set every iteration and drop the smallest |coefficient|.
pub fn rfe_trace(
    d: &Dataset,
    features: &FeatureSet,
    seed: u64,
    config: &SelectorConfig,
) -> Result<EliminationTrace> {
    eliminate(SelectorKind::Rfe, d, features, seed, config, |t, surviving| {
        let cfg = LogRegConfig {
            seed: seed::derive(seed, t as u64),
            ..config.rfe.clone()
        };
        let model = train_logreg(d, surviving, &cfg)?;
        let magnitudes: Vec<(usize, f64)> = model
            .features
            .iter()
            .zip(&model.weights)
            .map(|(&id, w)| (id, w.abs()))
            .collect();
        let (id, mag) = argmin_first(&magnitudes).expect("surviving set is nonempty");
        Ok((id, mag, 1))
    })
}
