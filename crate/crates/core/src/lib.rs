//! Two-round ensemble feature selection for network anomaly detection.
//!
//! Round one drops redundant numeric features by pairwise Pearson
//! correlation. Round two runs four elimination selectors (recursive feature
//! elimination, sequential backward selection, univariate chi-square and
//! random-forest Gini importance) down to a single feature each, and the
//! per-iteration surviving sets are combined by union, intersection or
//! quorum vote. The evaluation harness scores every combined candidate with
//! cross-validation on the training data and on a held-out test set.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod learners;
pub mod seed;
pub mod selectors;

pub use error::{Error, Result, Stage};
pub use config::RunConfig;
pub use features::FeatureSet;
