use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;

/// Sample Pearson correlation, clamped to [-1, 1].
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "columns of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least two rows"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("correlation of a constant column"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedPair {
    pub dropped: usize,
    pub partner: usize,
    pub abs_corr: f64,
}

/// Outcome of the redundancy pre-filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub kept: FeatureSet,
    pub dropped: Vec<DroppedPair>,
    pub threshold: f64,
}

impl CorrelationReport {
    pub fn dropped_set(&self) -> FeatureSet {
        self.dropped.iter().map(|p| p.dropped).collect()
    }
}

/// Pre-filter over all numeric columns of `d`.
pub fn correlation_prefilter(d: &Dataset, threshold: f64) -> Result<CorrelationReport> {
    correlation_prefilter_on(d, &d.numeric_features(), threshold)
}

/// Scans pairs `(i, j)`, `i < j`, in ascending order over the features still
/// kept; when `|corr(i, j)| > threshold` the higher id `j` is dropped.
pub fn correlation_prefilter_on(
    d: &Dataset,
    features: &FeatureSet,
    threshold: f64,
) -> Result<CorrelationReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!(
            "correlation threshold must lie in (0, 1], got {threshold}"
        )));
    }
    d.check_features(features)?;
    let ids = features.to_vec();
    let cols = d.gather_columns(features);
    let mut alive = vec![true; ids.len()];
    let mut dropped = Vec::new();
    for i in 0..ids.len() {
        if !alive[i] {
            continue;
        }
        for j in i + 1..ids.len() {
            if !alive[j] {
                continue;
            }
            let r = pearson_corr(&cols[i], &cols[j])
                .map_err(|e| Error::invalid(format!("features {} and {}: {e}", ids[i], ids[j])))?
                .abs();
            if r > threshold {
                alive[j] = false;
                dropped.push(DroppedPair {
                    dropped: ids[j],
                    partner: ids[i],
                    abs_corr: r,
                });
            }
        }
    }
    let kept = ids
        .iter()
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|(&id, _)| id)
        .collect();
    Ok(CorrelationReport {
        kept,
        dropped,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_negation() {
        let x = [1.0, 4.0, 2.0, 8.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_corr(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_corr(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn textbook_value() {
        // means 2 and 13/3; deviations (-1,0,1) and (-7/3,-1/3,8/3):
        // sxy = 5, sxx = 2, syy = 114/9 -> r = 5 / sqrt(2 * 114 / 9)
        let expected = 5.0 / (2.0f64 * 114.0 / 9.0).sqrt();
        let r = pearson_corr(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 0.993_399_267_798_783).abs() < 1e-12);
    }

    #[test]
    fn constant_and_short_inputs_error() {
        assert!(pearson_corr(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson_corr(&[1.0], &[1.0]).is_err());
        assert!(pearson_corr(&[1.0, 2.0], &[1.0]).is_err());
    }

    fn data(cols: Vec<Vec<f64>>) -> Dataset {
        let n = cols[0].len();
        let rows = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        Dataset::from_rows(names, rows, (0..n).map(|r| (r % 2) as u8).collect(), "t").unwrap()
    }

    #[test]
    fn duplicate_column_drops_higher_index() {
        let a = vec![0.3, 0.1, 0.9, 0.4, 0.7];
        let b = vec![1.0, 0.0, 1.0, 0.5, 0.2];
        let d = data(vec![a.clone(), b, a]);
        let rep = correlation_prefilter(&d, 0.9).unwrap();
        assert_eq!(rep.kept.to_vec(), vec![0, 1]);
        assert_eq!(
            rep.dropped,
            vec![DroppedPair {
                dropped: 2,
                partner: 0,
                abs_corr: 1.0
            }]
        );
    }

    #[test]
    fn uncorrelated_columns_survive_and_idempotent() {
        let d = data(vec![
            vec![1.0, -1.0, 1.0, -1.0],
            vec![1.0, 1.0, -1.0, -1.0],
            vec![1.0, -1.0, -1.0, 1.0],
        ]);
        let rep = correlation_prefilter(&d, 0.9).unwrap();
        assert_eq!(rep.kept, d.all_features());
        let again = correlation_prefilter_on(&d, &rep.kept, 0.9).unwrap();
        assert!(again.dropped.is_empty());
    }

    #[test]
    fn threshold_validation() {
        let d = data(vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(correlation_prefilter(&d, 0.0).is_err());
        assert!(correlation_prefilter(&d, 1.1).is_err());
        assert!(correlation_prefilter(&d, 1.0).is_ok());
    }
}
