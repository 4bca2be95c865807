//! Classifiers used by the selectors and the evaluation harness.

mod confusion;
mod forest;
mod logreg;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;

pub use confusion::{confusion, ConfusionMatrix};
pub use forest::{gini_impurity, train_random_forest, ForestConfig, ForestModel, Node, Tree};
pub use logreg::{train_logreg, train_logreg_traced, LogRegConfig, LogRegModel};

/// Version tag written into serialized models.
pub const MODEL_VERSION: u32 = 1;

/// Hyperparameters of a pluggable learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerConfig {
    Lr(LogRegConfig),
    Rf(ForestConfig),
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Lr(_) => "lr",
            LearnerConfig::Rf(_) => "rf",
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            LearnerConfig::Lr(c) => c.seed,
            LearnerConfig::Rf(c) => c.seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            LearnerConfig::Lr(c) => LearnerConfig::Lr(LogRegConfig { seed, ..c.clone() }),
            LearnerConfig::Rf(c) => LearnerConfig::Rf(ForestConfig { seed, ..c.clone() }),
        }
    }

    pub fn fit(&self, d: &Dataset, features: &FeatureSet) -> Result<Model> {
        match self {
            LearnerConfig::Lr(c) => train_logreg(d, features, c).map(Model::LogReg),
            LearnerConfig::Rf(c) => train_random_forest(d, features, c).map(Model::Forest),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    LogReg(LogRegModel),
    Forest(ForestModel),
}

impl Model {
    pub fn features(&self) -> &[usize] {
        match self {
            Model::LogReg(m) => &m.features,
            Model::Forest(m) => &m.features,
        }
    }

    pub fn predict(&self, d: &Dataset, features: &FeatureSet) -> Result<Vec<u8>> {
        match self {
            Model::LogReg(m) => m.predict(d, features),
            Model::Forest(m) => m.predict(d, features),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Shared precondition of every trainer.
pub(crate) fn check_training_input(d: &Dataset, features: &FeatureSet) -> Result<Vec<usize>> {
    if features.is_empty() {
        return Err(Error::invalid("empty feature set"));
    }
    d.check_features(features)?;
    let (neg, pos) = d.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::invalid("training data contains a single class"));
    }
    Ok(features.to_vec())
}

pub(crate) fn check_prediction_input(
    model_features: &[usize],
    d: &Dataset,
    features: &FeatureSet,
) -> Result<()> {
    if features.len() != model_features.len()
        || !features.iter().zip(model_features).all(|(a, &b)| a == b)
    {
        return Err(Error::FeatureMismatch(format!(
            "model trained on {:?}, asked to predict with {features}",
            model_features
        )));
    }
    d.check_features(features)
}
