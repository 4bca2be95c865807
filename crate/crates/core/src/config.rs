//! Run configuration, read from a TOML document.
//!
//! ```toml
//! seed = 7
//! prefilter_threshold = 0.9
//! selectors = ["rfe", "sbs", "univariate", "importance"]
//! heuristics = ["union", "intersection", "quorum"]
//! learners = ["lr", "rf"]
//!
//! [synth]
//! n_rows = 2000
//! n_informative = 3
//! n_noise = 12
//! n_redundant = 2
//! flip_prob = 0.05
//! ```
//!
//! A `[data]` table (`train`, `test`, optional `schema`, `label`,
//! `normal_label`, `sample_rows`) replaces `[synth]` for file input; relative
//! paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::SynthParams;
use crate::ensemble::{parse_heuristic, Heuristic};
use crate::error::{Error, Result};
use crate::learners::{ForestConfig, LearnerConfig, LogRegConfig};
use crate::selectors::{SelectorConfig, SelectorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Lr,
    Rf,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Lr => "lr",
            LearnerKind::Rf => "rf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default)]
    pub schema: Option<PathBuf>,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub normal_label: Option<String>,
    /// Random row subsample applied to each file.
    #[serde(default)]
    pub sample_rows: Option<usize>,
}

fn default_label() -> String {
    "label".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_rows: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    pub n_redundant: usize,
    pub flip_prob: f64,
    /// Defaults to the master seed.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SynthConfig {
    pub fn params(&self, master_seed: u64) -> SynthParams {
        SynthParams {
            n_rows: self.n_rows,
            n_informative: self.n_informative,
            n_noise: self.n_noise,
            n_redundant: self.n_redundant,
            flip_prob: self.flip_prob,
            seed: self.seed.unwrap_or(master_seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    #[serde(default)]
    pub data: Option<DataConfig>,
    #[serde(default)]
    pub synth: Option<SynthConfig>,
    #[serde(default = "default_threshold")]
    pub prefilter_threshold: f64,
    #[serde(default = "default_selectors")]
    pub selectors: Vec<SelectorKind>,
    #[serde(default = "default_heuristics")]
    pub heuristics: Vec<String>,
    /// Overrides the strict-majority threshold of `quorum`.
    #[serde(default)]
    pub quorum_threshold: Option<usize>,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerKind>,
    #[serde(default)]
    pub lr: LogRegConfig,
    #[serde(default)]
    pub rf: ForestConfig,
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_cv_learner")]
    pub cv_learner: LearnerKind,
    #[serde(default)]
    pub onehot_augment: bool,
    #[serde(default)]
    pub selector: SelectorConfig,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

fn default_threshold() -> f64 {
    0.9
}
fn default_selectors() -> Vec<SelectorKind> {
    SelectorKind::ALL.to_vec()
}
fn default_heuristics() -> Vec<String> {
    vec!["union".into(), "intersection".into(), "quorum".into()]
}
fn default_learners() -> Vec<LearnerKind> {
    vec![LearnerKind::Lr, LearnerKind::Rf]
}
fn default_cv_folds() -> usize {
    5
}
fn default_cv_learner() -> LearnerKind {
    LearnerKind::Rf
}
fn default_repeats() -> usize {
    1
}

impl RunConfig {
    /// Minimal synthetic configuration with every other key at its default.
    pub fn synthetic(seed: u64, synth: SynthConfig) -> Self {
        RunConfig {
            seed,
            data: None,
            synth: Some(synth),
            prefilter_threshold: default_threshold(),
            selectors: default_selectors(),
            heuristics: default_heuristics(),
            quorum_threshold: None,
            learners: default_learners(),
            lr: LogRegConfig::default(),
            rf: ForestConfig::default(),
            cv_folds: default_cv_folds(),
            cv_learner: default_cv_learner(),
            onehot_augment: false,
            selector: SelectorConfig::default(),
            repeats: 1,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative data paths resolve against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(data) = &mut cfg.data {
            for p in [&mut data.train, &mut data.test]
                .into_iter()
                .chain(data.schema.as_mut())
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data, &self.synth) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("configure either [data] or [synth], not both".into()))
            }
            (None, None) => return Err(Error::Config("missing [data] or [synth] table".into())),
            (None, Some(s)) => s
                .params(self.seed)
                .validate()
                .map_err(|e| Error::Config(format!("synth: {e}")))?,
            (Some(_), None) => {}
        }
        if self.selectors.is_empty() {
            return Err(Error::Config("at least one selector is required".into()));
        }
        let mut uniq = self.selectors.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != self.selectors.len() {
            return Err(Error::Config("selector listed twice".into()));
        }
        if self.learners.is_empty() {
            return Err(Error::Config("at least one learner is required".into()));
        }
        let hs = self.heuristic_list()?;
        if hs.is_empty() {
            return Err(Error::Config("at least one heuristic is required".into()));
        }
        let k = self.selectors.len();
        for h in hs {
            if let Heuristic::Quorum { threshold } = h {
                if threshold == 0 || threshold > k {
                    return Err(Error::Config(format!(
                        "quorum threshold {threshold} outside 1..={k}"
                    )));
                }
            }
        }
        if !(self.prefilter_threshold > 0.0 && self.prefilter_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "prefilter_threshold must lie in (0, 1], got {}",
                self.prefilter_threshold
            )));
        }
        if self.cv_folds < 2 || self.selector.sbs.folds < 2 {
            return Err(Error::Config("fold counts must be >= 2".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        Ok(())
    }

    pub fn heuristic_list(&self) -> Result<Vec<Heuristic>> {
        let k = self.selectors.len();
        self.heuristics
            .iter()
            .map(|s| {
                let h = parse_heuristic(s, k)?;
                Ok(match (h, self.quorum_threshold) {
                    (Heuristic::Quorum { .. }, Some(threshold)) if s.trim().eq_ignore_ascii_case("quorum") => {
                        Heuristic::Quorum { threshold }
                    }
                    _ => h,
                })
            })
            .collect()
    }

    pub fn learner(&self, kind: LearnerKind) -> LearnerConfig {
        match kind {
            LearnerKind::Lr => LearnerConfig::Lr(self.lr.clone()),
            LearnerKind::Rf => LearnerConfig::Rf(self.rf.clone()),
        }
    }

    /// Configuration of repeat `r`: repeat 0 is the configuration itself,
    /// later repeats use a derived master seed.
    pub fn for_repeat(&self, r: usize) -> RunConfig {
        let mut cfg = self.clone();
        if r > 0 {
            cfg.seed = crate::seed::derive_str(self.seed, &format!("repeat-{r}"));
        }
        cfg.repeats = 1;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "seed = 3\n[synth]\nn_rows = 100\nn_informative = 2\nn_noise = 3\nn_redundant = 1\nflip_prob = 0.0\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.prefilter_threshold, 0.9);
        assert_eq!(c.selectors.len(), 4);
        assert_eq!(c.cv_folds, 5);
        assert_eq!(c.rf.n_trees, 100);
        assert_eq!(c.selector.sbs.folds, 3);
        assert_eq!(
            c.heuristic_list().unwrap(),
            vec![
                Heuristic::Union,
                Heuristic::Intersection,
                Heuristic::Quorum { threshold: 3 }
            ]
        );
        let echoed = RunConfig::from_toml_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(echoed, c);
    }

    #[test]
    fn seed_is_required() {
        let text = MINIMAL.replace("seed = 3\n", "");
        assert!(matches!(RunConfig::from_toml_str(&text), Err(Error::Config(_))));
    }

    #[test]
    fn invariant_violations() {
        for extra in [
            "selectors = []\n",
            "learners = []\n",
            "heuristics = []\n",
            "quorum_threshold = 5\n",
            "prefilter_threshold = 0.0\n",
            "bogus = 1\n",
        ] {
            let text = format!("{extra}{MINIMAL}");
            assert!(RunConfig::from_toml_str(&text).is_err(), "{extra}");
        }
        let both = format!("{MINIMAL}[data]\ntrain = \"a\"\ntest = \"b\"\n");
        assert!(RunConfig::from_toml_str(&both).is_err());
    }

    #[test]
    fn quorum_override() {
        let text = format!("quorum_threshold = 2\n{MINIMAL}");
        let c = RunConfig::from_toml_str(&text).unwrap();
        assert!(c.heuristic_list().unwrap().contains(&Heuristic::Quorum { threshold: 2 }));
    }
}
