use serde::{Deserialize, Serialize};

use super::EvaluationReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub learner: String,
    pub n_features: usize,
    pub train_seconds: f64,
    pub test_seconds: f64,
}

/// One row per timed evaluation, sorted by descending feature count.
pub fn timing_curve(report: &EvaluationReport) -> Vec<TimingRow> {
    let mut rows: Vec<TimingRow> = report
        .evaluations
        .iter()
        .map(|e| TimingRow {
            learner: e.learner.clone(),
            n_features: e.features.len(),
            train_seconds: e.metrics.train_seconds,
            test_seconds: e.metrics.test_seconds,
        })
        .collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.n_features));
    rows
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side has no spread.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}
