use serde::{Deserialize, Serialize};

use crate::learners::ConfusionMatrix;

/// Test-set scores of one trained learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when F1 was undefined (no positives predicted or present).
    pub degenerate: bool,
    pub cm: ConfusionMatrix,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

impl Metrics {
    pub fn from_confusion(cm: ConfusionMatrix, train_seconds: f64, test_seconds: f64) -> Self {
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Metrics {
            accuracy: ratio(cm.tp + cm.tn, cm.total()),
            precision: ratio(cm.tp, cm.tp + cm.fp),
            recall: ratio(cm.tp, cm.tp + cm.fn_),
            f1: f1_score(&cm),
            degenerate: cm.tp + cm.fp + cm.fn_ == 0,
            cm,
            train_seconds,
            test_seconds,
        }
    }

    pub fn without_timing(&self) -> Metrics {
        Metrics {
            train_seconds: 0.0,
            test_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// `2tp / (2tp + fp + fn)`; 0 when the denominator vanishes.
pub fn f1_score(cm: &ConfusionMatrix) -> f64 {
    let den = 2 * cm.tp + cm.fp + cm.fn_;
    if den == 0 {
        0.0
    } else {
        (2 * cm.tp) as f64 / den as f64
    }
}
