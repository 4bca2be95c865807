use super::{chi_square_score, eliminate, EliminationTrace, SelectorConfig, SelectorKind};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;

/// Static chi-square ranking: scores are computed once and features are
/// eliminated in ascending score order, ties to the lower id.
pub fn univariate_trace(
    d: &Dataset,
    features: &FeatureSet,
    config: &SelectorConfig,
) -> Result<EliminationTrace> {
    d.check_features(features)?;
    let mut ranked: Vec<(usize, f64)> = features
        .iter()
        .map(|id| {
            chi_square_score(&d.column(id), d.labels())
                .map(|s| (id, s))
                .map_err(|e| Error::invalid(format!("feature {id}: {e}")))
        })
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut queue = ranked.into_iter();
    eliminate(SelectorKind::Univariate, d, features, 0, config, |_, _| {
        let (id, score) = queue.next().expect("one ranked entry per elimination");
        Ok((id, score, 0))
    })
}
