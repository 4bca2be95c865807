use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary confusion counts with anomaly (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(truth: &[u8], predicted: &[u8]) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "{} truth labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            (0, 0) => cm.tn += 1,
            _ => return Err(Error::Label(format!("non-binary label pair ({t}, {p})"))),
        }
    }
    Ok(cm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_prediction() {
        let cm = confusion(&[1, 1, 0, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 2, fp: 0, fn_: 0, tn: 2 });
    }

    #[test]
    fn all_positive_prediction() {
        let cm = confusion(&[1, 0], &[1, 1]).unwrap();
        assert_eq!((cm.tp, cm.fp), (1, 1));
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    proptest! {
        #[test]
        fn counts_partition_samples(pairs in proptest::collection::vec((0u8..2, 0u8..2), 0..200)) {
            let (t, p): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
            let cm = confusion(&t, &p).unwrap();
            prop_assert_eq!(cm.total() as usize, t.len());
        }
    }
}
