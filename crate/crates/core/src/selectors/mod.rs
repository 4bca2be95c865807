//! Round-one redundancy pre-filter and the round-two elimination selectors.
//!
//! Every selector starts from the pre-filter's kept set and removes one
//! feature per iteration until a single feature is left, recording the full
//! elimination order.

mod chi2;
mod correlation;
mod importance;
mod rfe;
mod sbs;
mod univariate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::learners::{ForestConfig, LogRegConfig};
use crate::seed;

pub use chi2::chi_square_score;
pub use correlation::{
    correlation_prefilter, correlation_prefilter_on, pearson_corr, CorrelationReport, DroppedPair,
};
pub use importance::importance_trace;
pub use rfe::rfe_trace;
pub use sbs::{sbs_trace, SbsConfig};
pub use univariate::univariate_trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Rfe,
    Sbs,
    Univariate,
    Importance,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::Rfe,
        SelectorKind::Sbs,
        SelectorKind::Univariate,
        SelectorKind::Importance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Rfe => "rfe",
            SelectorKind::Sbs => "sbs",
            SelectorKind::Univariate => "univariate",
            SelectorKind::Importance => "importance",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown selector `{s}`")))
    }
}

/// Learner settings for the selectors that train models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectorConfig {
    pub rfe: LogRegConfig,
    pub sbs: SbsConfig,
    pub importance: ForestConfig,
}


/// One selector's elimination record over `m` starting features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationTrace {
    pub selector: SelectorKind,
    pub start_set: FeatureSet,
    /// The `m - 1` eliminated ids, first eliminated first.
    pub order: Vec<usize>,
    /// Per-iteration diagnostic: chi-square score, |coefficient|, importance
    /// or SBS criterion of the eliminated feature.
    pub scores: Vec<f64>,
    /// Models trained per iteration.
    pub model_fits: Vec<usize>,
    pub seed: u64,
    pub config: SelectorConfig,
    /// Provenance tag of the dataset the trace was computed on.
    pub provenance: String,
}

impl EliminationTrace {
    pub fn m(&self) -> usize {
        self.start_set.len()
    }

    /// Surviving set after `t` eliminations, `0 <= t <= m - 1`.
    pub fn surviving(&self, t: usize) -> Result<FeatureSet> {
        if self.m() == 0 || t >= self.m() {
            return Err(Error::invalid(format!(
                "iteration {t} out of range for a trace over {} features",
                self.m()
            )));
        }
        let mut s = self.start_set.clone();
        for &id in &self.order[..t] {
            s.remove(id);
        }
        Ok(s)
    }

    /// All surviving sets, t = 0..m-1.
    pub fn surviving_sets(&self) -> Vec<FeatureSet> {
        let mut out = Vec::with_capacity(self.m());
        let mut s = self.start_set.clone();
        out.push(s.clone());
        for &id in &self.order {
            s.remove(id);
            out.push(s.clone());
        }
        out
    }

    /// Checks the trace contract: distinct eliminations drawn from the start
    /// set, ending in a singleton.
    pub fn validate(&self) -> Result<()> {
        if self.start_set.is_empty() {
            return Err(Error::invalid("trace with an empty start set"));
        }
        if self.order.len() + 1 != self.m() {
            return Err(Error::invalid(format!(
                "{} eliminations for {} features",
                self.order.len(),
                self.m()
            )));
        }
        let mut left = self.start_set.clone();
        for &id in &self.order {
            if !left.remove(id) {
                return Err(Error::invalid(format!(
                    "feature {id} eliminated twice or not in the start set"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: EliminationTrace = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }
}

/// Seed of one selector's trace under a master seed.
pub fn selector_seed(master: u64, kind: SelectorKind) -> u64 {
    seed::derive_str(master, kind.as_str())
}

pub fn run_selector(
    kind: SelectorKind,
    d: &Dataset,
    features: &FeatureSet,
    seed: u64,
    config: &SelectorConfig,
) -> Result<EliminationTrace> {
    match kind {
        SelectorKind::Univariate => univariate_trace(d, features, config),
        SelectorKind::Rfe => rfe_trace(d, features, seed, config),
        SelectorKind::Sbs => sbs_trace(d, features, seed, config),
        SelectorKind::Importance => importance_trace(d, features, seed, config),
    }
}

/// Drives the common elimination loop. `pick` receives the iteration and the
/// current surviving set and returns (feature to drop, diagnostic score,
/// models trained).
pub(crate) fn eliminate<F>(
    kind: SelectorKind,
    d: &Dataset,
    features: &FeatureSet,
    seed: u64,
    config: &SelectorConfig,
    mut pick: F,
) -> Result<EliminationTrace>
where
    F: FnMut(usize, &FeatureSet) -> Result<(usize, f64, usize)>,
{
    if features.is_empty() {
        return Err(Error::invalid("selector needs at least one feature"));
    }
    d.check_features(features)?;
    let mut surviving = features.clone();
    let mut order = Vec::with_capacity(features.len() - 1);
    let mut scores = Vec::with_capacity(features.len() - 1);
    let mut model_fits = Vec::with_capacity(features.len() - 1);
    let mut t = 0;
    while surviving.len() > 1 {
        let (id, score, fits) = pick(t, &surviving)?;
        if !surviving.remove(id) {
            return Err(Error::invalid(format!(
                "{kind} tried to eliminate {id}, which is not surviving"
            )));
        }
        log::debug!("{kind} iteration {t}: drop feature {id} (score {score})");
        order.push(id);
        scores.push(score);
        model_fits.push(fits);
        t += 1;
    }
    Ok(EliminationTrace {
        selector: kind,
        start_set: features.clone(),
        order,
        scores,
        model_fits,
        seed,
        config: config.clone(),
        provenance: d.provenance().to_string(),
    })
}

/// Position of the minimum, ties to the first (lowest id when `items` is in
/// ascending id order).
pub(crate) fn argmin_first(items: &[(usize, f64)]) -> Option<(usize, f64)> {
    items.iter().copied().fold(None, |best, (id, v)| match best {
        Some((_, bv)) if bv <= v => best,
        _ => Some((id, v)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(order: Vec<usize>) -> EliminationTrace {
        EliminationTrace {
            selector: SelectorKind::Rfe,
            start_set: [3, 5, 8].into_iter().collect(),
            order,
            scores: vec![],
            model_fits: vec![],
            seed: 0,
            config: SelectorConfig::default(),
            provenance: String::new(),
        }
    }

    #[test]
    fn surviving_sets_nest() {
        let t = trace(vec![5, 3]);
        t.validate().unwrap();
        assert_eq!(t.surviving(0).unwrap().to_vec(), vec![3, 5, 8]);
        assert_eq!(t.surviving(1).unwrap().to_vec(), vec![3, 8]);
        assert_eq!(t.surviving(2).unwrap().to_vec(), vec![8]);
        assert!(t.surviving(3).is_err());
        assert_eq!(t.surviving_sets().len(), 3);
    }

    #[test]
    fn invalid_traces() {
        assert!(trace(vec![5]).validate().is_err());
        assert!(trace(vec![5, 5]).validate().is_err());
        assert!(trace(vec![5, 9]).validate().is_err());
    }

    #[test]
    fn argmin_ties_to_first() {
        assert_eq!(argmin_first(&[(1, 2.0), (4, 1.0), (6, 1.0)]), Some((4, 1.0)));
        assert_eq!(argmin_first(&[]), None);
    }

    #[test]
    fn selector_names_parse() {
        for k in SelectorKind::ALL {
            assert_eq!(k.as_str().parse::<SelectorKind>().unwrap(), k);
        }
        assert!("lasso".parse::<SelectorKind>().is_err());
    }
}
