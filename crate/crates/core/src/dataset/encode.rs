use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind};
use crate::error::{Error, Result};

/// One-hot encoding of one categorical column, fitted on training data.
///
/// Categories are kept in sorted order. At transform time a value outside
/// the fitted categories produces an all-zero block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotEncoder {
    pub column: String,
    pub categories: Vec<String>,
}

impl OneHotEncoder {
    pub fn fit(train: &Dataset, column: &str) -> Result<Self> {
        let cat = find_categorical(train, column)?;
        let categories: Vec<String> = cat
            .values
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if categories.is_empty() {
            return Err(Error::invalid(format!(
                "categorical column {column} has no observed values"
            )));
        }
        Ok(OneHotEncoder {
            column: column.to_string(),
            categories,
        })
    }

    pub fn width(&self) -> usize {
        self.categories.len()
    }

    /// Replaces the categorical column by one binary column per category,
    /// appended after the existing feature columns.
    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        let cat = find_categorical(d, &self.column)?;
        let old_w = d.n_features();
        let n = self.width();
        let mut values = Vec::with_capacity(d.n_rows() * (old_w + n));
        for r in 0..d.n_rows() {
            values.extend_from_slice(d.row(r));
            let hit = self.categories.iter().position(|c| *c == cat.values[r]);
            values.extend((0..n).map(|k| if Some(k) == hit { 1.0 } else { 0.0 }));
        }
        let mut names: Vec<String> = d.columns().iter().map(|c| c.name.clone()).collect();
        let mut kinds: Vec<FeatureKind> = d.columns().iter().map(|c| c.kind.clone()).collect();
        for c in &self.categories {
            names.push(format!("{}={}", self.column, c));
            kinds.push(FeatureKind::Onehot {
                parent: self.column.clone(),
                category: c.clone(),
            });
        }
        let categoricals = d
            .categoricals()
            .iter()
            .filter(|c| c.name != self.column)
            .cloned()
            .collect();
        let mut out = Dataset::assemble(
            names,
            kinds,
            values,
            d.labels().to_vec(),
            categoricals,
            d.provenance().to_string(),
        )?;
        out.set_dropped_constant(d.dropped_constant().to_vec());
        Ok(out)
    }
}

fn find_categorical<'a>(d: &'a Dataset, column: &str) -> Result<&'a super::CategoricalColumn> {
    d.categoricals()
        .iter()
        .find(|c| c.name == column)
        .ok_or_else(|| {
            if d.id_of(column).is_some() {
                Error::invalid(format!("column {column} is not categorical"))
            } else {
                Error::Schema(format!("unknown column {column}"))
            }
        })
}

/// Fits an encoder on `d` and applies it to `d`.
pub fn one_hot_encode(d: &Dataset, column: &str) -> Result<Dataset> {
    OneHotEncoder::fit(d, column)?.transform(d)
}

/// Min-max scales the numeric columns of `apply_to` using the ranges of
/// `train`. Constant training columns map to 0; values outside the training
/// range are left unclipped. One-hot columns pass through.
pub fn normalize_minmax(train: &Dataset, apply_to: &Dataset) -> Result<Dataset> {
    let same_layout = train.n_features() == apply_to.n_features()
        && train
            .columns()
            .iter()
            .zip(apply_to.columns())
            .all(|(a, b)| a.name == b.name && a.kind == b.kind);
    if !same_layout {
        return Err(Error::Layout(
            "normalization target has a different column layout than the training set".into(),
        ));
    }
    let w = train.n_features();
    // ranges from the training values themselves
    let mut lo = vec![f64::INFINITY; w];
    let mut hi = vec![f64::NEG_INFINITY; w];
    for r in 0..train.n_rows() {
        for (j, &v) in train.row(r).iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let numeric: Vec<bool> = train.columns().iter().map(|c| c.is_numeric()).collect();
    let mut values = Vec::with_capacity(apply_to.n_rows() * w);
    for r in 0..apply_to.n_rows() {
        for (j, &v) in apply_to.row(r).iter().enumerate() {
            let scaled = if !numeric[j] {
                v
            } else if hi[j] > lo[j] {
                (v - lo[j]) / (hi[j] - lo[j])
            } else {
                0.0
            };
            values.push(scaled);
        }
    }
    let mut out = Dataset::assemble(
        apply_to.columns().iter().map(|c| c.name.clone()).collect(),
        apply_to.columns().iter().map(|c| c.kind.clone()).collect(),
        values,
        apply_to.labels().to_vec(),
        apply_to.categoricals().to_vec(),
        apply_to.provenance().to_string(),
    )?;
    out.set_ranges_from(train);
    out.set_dropped_constant(apply_to.dropped_constant().to_vec());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::CategoricalColumn;
    use super::*;

    fn with_proto(protos: &[&str]) -> Dataset {
        let n = protos.len();
        let mut d = Dataset::from_rows(
            vec!["x".into()],
            (0..n).map(|i| vec![i as f64]).collect(),
            (0..n).map(|i| (i % 2) as u8).collect(),
            "p",
        )
        .unwrap();
        d.categoricals = vec![CategoricalColumn {
            name: "proto".into(),
            values: protos.iter().map(|s| s.to_string()).collect(),
        }];
        d
    }

    #[test]
    fn two_protocols_give_two_columns() {
        let d = with_proto(&["TCP", "UDP", "TCP"]);
        let e = one_hot_encode(&d, "proto").unwrap();
        assert_eq!(e.n_features(), 3);
        assert_eq!(e.onehot_features().len(), 2);
        assert_eq!(e.name_of(1), Some("proto=TCP"));
        assert_eq!(e.row(1), &[1.0, 0.0, 1.0]);
        assert!(e.categoricals().is_empty());
    }

    #[test]
    fn single_category_is_all_ones() {
        let e = one_hot_encode(&with_proto(&["TCP", "TCP"]), "proto").unwrap();
        assert_eq!(e.column(1), vec![1.0, 1.0]);
    }

    #[test]
    fn unseen_category_is_all_zero() {
        let enc = OneHotEncoder::fit(&with_proto(&["TCP", "UDP"]), "proto").unwrap();
        let test = enc.transform(&with_proto(&["ICMP", "UDP"])).unwrap();
        assert_eq!(test.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(test.row(1), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn numeric_column_is_not_categorical() {
        let d = with_proto(&["TCP"]);
        assert!(matches!(one_hot_encode(&d, "x"), Err(Error::InvalidInput(_))));
        assert!(matches!(one_hot_encode(&d, "nope"), Err(Error::Schema(_))));
    }

    fn col(vals: &[f64]) -> Dataset {
        Dataset::from_rows(
            vec!["a".into()],
            vals.iter().map(|&v| vec![v]).collect(),
            vals.iter().map(|_| 0).collect(),
            "n",
        )
        .unwrap()
    }

    #[test]
    fn minmax_endpoints_no_clip_and_constants() {
        let train = col(&[0.0, 5.0, 10.0]);
        let test = col(&[10.0, 12.0, -1.0]);
        let out = normalize_minmax(&train, &test).unwrap();
        assert_eq!(out.column(0), vec![1.0, 1.2, -0.1]);
        assert_eq!(out.columns()[0].train_min, 0.0);
        assert_eq!(out.columns()[0].train_max, 10.0);

        let flat = col(&[3.0, 3.0]);
        let out = normalize_minmax(&flat, &col(&[3.0, 100.0])).unwrap();
        assert_eq!(out.column(0), vec![0.0, 0.0]);
    }

    #[test]
    fn minmax_layout_mismatch() {
        let other = Dataset::from_rows(vec!["b".into()], vec![vec![1.0]], vec![0], "o").unwrap();
        assert!(matches!(
            normalize_minmax(&col(&[1.0, 2.0]), &other),
            Err(Error::Layout(_))
        ));
    }

    #[test]
    fn onehot_columns_pass_through_normalization() {
        let e = one_hot_encode(&with_proto(&["TCP", "TCP", "TCP"]), "proto").unwrap();
        let n = normalize_minmax(&e, &e).unwrap();
        assert_eq!(n.column(1), vec![1.0, 1.0, 1.0]);
        assert_eq!(n.column(0), vec![0.0, 0.5, 1.0]);
    }
}
