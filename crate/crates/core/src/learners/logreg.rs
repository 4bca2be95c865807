use serde::{Deserialize, Serialize};

use super::{check_prediction_input, check_training_input, MODEL_VERSION};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::features::FeatureSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        LogRegConfig {
            learning_rate: 0.1,
            iterations: 500,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// L2-regularized logistic regression fitted by full-batch gradient descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub model_version: u32,
    /// Dataset ids of the training features, ascending; `weights[i]`
    /// belongs to `features[i]`.
    pub features: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: LogRegConfig,
}

impl LogRegModel {
    pub fn weight_of(&self, id: usize) -> Option<f64> {
        self.features
            .iter()
            .position(|&f| f == id)
            .map(|i| self.weights[i])
    }

    pub fn probabilities(&self, d: &Dataset, features: &FeatureSet) -> Result<Vec<f64>> {
        check_prediction_input(&self.features, d, features)?;
        Ok((0..d.n_rows())
            .map(|r| {
                let row = d.row(r);
                let z = self.bias
                    + self
                        .features
                        .iter()
                        .zip(&self.weights)
                        .map(|(&f, w)| w * row[f])
                        .sum::<f64>();
                sigmoid(z)
            })
            .collect())
    }

    /// Probability >= 0.5 maps to anomaly.
    pub fn predict(&self, d: &Dataset, features: &FeatureSet) -> Result<Vec<u8>> {
        Ok(self
            .probabilities(d, features)?
            .into_iter()
            .map(|p| u8::from(p >= 0.5))
            .collect())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn train_logreg(d: &Dataset, features: &FeatureSet, config: &LogRegConfig) -> Result<LogRegModel> {
    train_logreg_traced(d, features, config).map(|(m, _)| m)
}

/// Like [`train_logreg`], also returning the regularized loss before every
/// gradient step and after the last one.
pub fn train_logreg_traced(
    d: &Dataset,
    features: &FeatureSet,
    config: &LogRegConfig,
) -> Result<(LogRegModel, Vec<f64>)> {
    let ids = check_training_input(d, features)?;
    let cols = d.gather_columns(features);
    let y: Vec<f64> = d.labels().iter().map(|&l| f64::from(l)).collect();
    let n = d.n_rows() as f64;
    let m = ids.len();
    let mut w = vec![0.0; m];
    let mut b = 0.0;
    let mut z = vec![0.0; d.n_rows()];
    let mut losses = Vec::with_capacity(config.iterations + 1);

    let logits = |w: &[f64], b: f64, z: &mut [f64]| {
        z.iter_mut().for_each(|v| *v = b);
        for (col, &wj) in cols.iter().zip(w) {
            for (v, x) in z.iter_mut().zip(col) {
                *v += wj * x;
            }
        }
    };
    let loss = |w: &[f64], z: &[f64]| {
        let data: f64 = z
            .iter()
            .zip(&y)
            .map(|(&zi, &yi)| softplus(zi) - yi * zi)
            .sum::<f64>()
            / n;
        data + 0.5 * config.l2 * w.iter().map(|v| v * v).sum::<f64>()
    };

    for _ in 0..config.iterations {
        logits(&w, b, &mut z);
        losses.push(loss(&w, &z));
        let resid: Vec<f64> = z.iter().zip(&y).map(|(&zi, &yi)| sigmoid(zi) - yi).collect();
        let gb = resid.iter().sum::<f64>() / n;
        for (wj, col) in w.iter_mut().zip(&cols) {
            let g = col.iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / n + config.l2 * *wj;
            *wj -= config.learning_rate * g;
        }
        b -= config.learning_rate * gb;
    }
    logits(&w, b, &mut z);
    losses.push(loss(&w, &z));

    Ok((
        LogRegModel {
            model_version: MODEL_VERSION,
            features: ids,
            weights: w,
            bias: b,
            config: config.clone(),
        },
        losses,
    ))
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}
