//! Cross-validation during training, train/test scoring of candidate sets,
//! the end-to-end experiment runner and its report.

mod cv;
mod experiment;
mod metrics;
mod report;
mod timing;

use std::time::Instant;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::learners::{confusion, LearnerConfig};

pub use cv::{cross_val_score, cross_val_score_with_plan, CvScore};
pub use experiment::{
    assemble_report, prefilter_stage, prepare, run_experiment, trace_stage, traces_stage, Prepared,
};
pub use metrics::{f1_score, Metrics};
pub use report::{
    render_outputs, write_outputs, BaselineResult, BaselineScope, CandidateResult, CvPoint,
    Evaluation, EvaluationReport, Manifest, OutputFile,
};
pub use timing::{spearman, timing_curve, TimingRow};

/// Trains on `train` restricted to `features` and scores predictions on
/// `test`. Returns `None` (skipped) for an empty feature set.
pub fn evaluate_candidate(
    train: &Dataset,
    test: &Dataset,
    features: &FeatureSet,
    learner: &LearnerConfig,
) -> Result<Option<Metrics>> {
    if features.is_empty() {
        return Ok(None);
    }
    let same_layout = train.n_features() == test.n_features()
        && train
            .columns()
            .iter()
            .zip(test.columns())
            .all(|(a, b)| a.name == b.name);
    if !same_layout {
        return Err(Error::Layout("train and test column layouts differ".into()));
    }
    let started = Instant::now();
    let model = learner.fit(train, features)?;
    let train_seconds = started.elapsed().as_secs_f64();
    let started = Instant::now();
    let predicted = model.predict(test, features)?;
    let test_seconds = started.elapsed().as_secs_f64();
    let cm = confusion(test.labels(), &predicted)?;
    Ok(Some(Metrics::from_confusion(cm, train_seconds, test_seconds)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::learners::ForestConfig;
    use crate::selectors::fixtures::label_copy;

    #[test]
    fn counts_cover_the_test_set() {
        let train = label_copy(80, 3, 1);
        let test = label_copy(50, 3, 2);
        let rf = LearnerConfig::Rf(ForestConfig::with_trees(5));
        let m = evaluate_candidate(&train, &test, &[0, 2].into_iter().collect(), &rf)
            .unwrap()
            .unwrap();
        assert_eq!(m.cm.total(), 50);
        assert_eq!(m.f1, 1.0);
        assert!(m.train_seconds >= 0.0 && m.test_seconds >= 0.0);
        assert!(evaluate_candidate(&train, &test, &FeatureSet::new(), &rf).unwrap().is_none());
    }

    #[test]
    fn layout_mismatch_is_rejected() {
        let train = label_copy(20, 2, 1);
        let test = Dataset::from_rows(
            vec!["x".into(), "y".into(), "z".into()],
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]],
            vec![0, 1],
            "t",
        )
        .unwrap();
        let rf = LearnerConfig::Rf(ForestConfig::with_trees(2));
        let err = evaluate_candidate(&train, &test, &[0].into_iter().collect(), &rf).unwrap_err();
        assert!(matches!(err, Error::Layout(_)));
    }
}
