use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_prediction_input, check_training_input, MODEL_VERSION};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::seed;

/// Binary Gini impurity `2p(1-p)` of a node whose positive fraction is `p`.
pub fn gini_impurity(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(2.0 * p * (1.0 - p))
}

/// Count-weighted impurity `n * gini(pos / n)` computed from integer counts.
fn weighted_gini(neg: u32, pos: u32) -> f64 {
    let n = neg + pos;
    if n == 0 {
        0.0
    } else {
        2.0 * f64::from(neg) * f64::from(pos) / f64::from(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` means ceil(sqrt(m)).
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            max_features: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn with_trees(n_trees: usize) -> Self {
        ForestConfig {
            n_trees,
            ..Default::default()
        }
    }

    fn subsample(&self, m: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (m as f64).sqrt().ceil() as usize)
            .clamp(1, m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        /// Dataset feature id.
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Bootstrap class counts reaching this leaf, as `[normal, anomaly]`.
    Leaf { counts: [u32; 2] },
}

/// CART tree stored as a flat node array; node 0 is the root and a row goes
/// left when its value is `<= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn vote(&self, row: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return u8::from(counts[1] >= counts[0]),
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub model_version: u32,
    pub features: Vec<usize>,
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub feature_subsample: usize,
    /// Normalized Gini importance, aligned with `features`.
    pub importances: Vec<f64>,
    pub seed: u64,
}

impl ForestModel {
    pub fn importance_of(&self, id: usize) -> Option<f64> {
        self.features
            .iter()
            .position(|&f| f == id)
            .map(|i| self.importances[i])
    }

    /// Majority vote over trees; an even split goes to anomaly.
    pub fn predict(&self, d: &Dataset, features: &FeatureSet) -> Result<Vec<u8>> {
        check_prediction_input(&self.features, d, features)?;
        Ok((0..d.n_rows())
            .map(|r| {
                let row = d.row(r);
                let votes: usize = self.trees.iter().map(|t| usize::from(t.vote(row))).sum();
                u8::from(2 * votes >= self.trees.len())
            })
            .collect())
    }
}

/// Bagged CART forest. Tree `i` draws its bootstrap and split candidates
/// from a stream seeded by `(config.seed, i)`, so the result does not depend
/// on how trees are scheduled across threads.
pub fn train_random_forest(
    d: &Dataset,
    features: &FeatureSet,
    config: &ForestConfig,
) -> Result<ForestModel> {
    let ids = check_training_input(d, features)?;
    if config.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    let cols = d.gather_columns(features);
    let labels = d.labels();
    let mtry = config.subsample(ids.len());

    let grown: Vec<(Tree, Vec<f64>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive(config.seed, t as u64));
            let mut builder = TreeBuilder {
                cols: &cols,
                ids: &ids,
                labels,
                config,
                mtry,
                rng: &mut rng,
                nodes: Vec::new(),
                gain: vec![0.0; ids.len()],
                scratch: Vec::new(),
            };
            let n = labels.len();
            let mut sample: Vec<usize> = (0..n).map(|_| builder.rng.random_range(0..n)).collect();
            sample.sort_unstable();
            builder.grow(&mut sample, 0);
            let total = n as f64;
            let gain = builder.gain.iter().map(|g| g / total).collect();
            (Tree { nodes: builder.nodes }, gain)
        })
        .collect();

    let mut importances = vec![0.0; ids.len()];
    let mut trees = Vec::with_capacity(grown.len());
    for (tree, gain) in grown {
        for (acc, g) in importances.iter_mut().zip(gain) {
            *acc += g;
        }
        trees.push(tree);
    }
    let sum: f64 = importances.iter().sum();
    if sum > 0.0 {
        importances.iter_mut().for_each(|v| *v /= sum);
    }

    Ok(ForestModel {
        model_version: MODEL_VERSION,
        features: ids,
        trees,
        n_trees: config.n_trees,
        max_depth: config.max_depth,
        feature_subsample: mtry,
        importances,
        seed: config.seed,
    })
}

struct TreeBuilder<'a> {
    cols: &'a [Vec<f64>],
    ids: &'a [usize],
    labels: &'a [u8],
    config: &'a ForestConfig,
    mtry: usize,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
    /// Unnormalized impurity decrease per local feature index.
    gain: Vec<f64>,
    scratch: Vec<(f64, u8)>,
}

struct SplitChoice {
    local: usize,
    threshold: f64,
    children_impurity: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, rows: &[usize]) -> [u32; 2] {
        let pos = rows.iter().filter(|&&r| self.labels[r] == 1).count() as u32;
        [rows.len() as u32 - pos, pos]
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let counts = self.counts(rows);
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.config.max_depth || rows.len() < self.config.min_samples_split.max(2) {
            return at;
        }
        let Some(choice) = self.best_split(rows) else {
            return at;
        };
        let parent_impurity = weighted_gini(counts[0], counts[1]);
        self.gain[choice.local] += (parent_impurity - choice.children_impurity).max(0.0);

        let col = &self.cols[choice.local];
        let mut split = 0;
        for i in 0..rows.len() {
            if col[rows[i]] <= choice.threshold {
                rows.swap(i, split);
                split += 1;
            }
        }
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split {
            feature: self.ids[choice.local],
            threshold: choice.threshold,
            left,
            right,
        };
        at
    }

    /// Visits features in random order until `mtry` non-constant ones have
    /// been scored. Lowest weighted child impurity wins; ties go to the lower
    /// feature id, then the lower threshold.
    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        let mut order: Vec<usize> = (0..self.cols.len()).collect();
        order.shuffle(self.rng);
        let mut best: Option<SplitChoice> = None;
        let mut scored = 0;
        for local in order {
            if scored == self.mtry {
                break;
            }
            let Some((threshold, impurity)) = self.best_threshold(local, rows) else {
                continue;
            };
            scored += 1;
            let better = match &best {
                None => true,
                Some(b) => {
                    impurity < b.children_impurity
                        || impurity == b.children_impurity
                            && (local < b.local || local == b.local && threshold < b.threshold)
                }
            };
            if better {
                best = Some(SplitChoice {
                    local,
                    threshold,
                    children_impurity: impurity,
                });
            }
        }
        best
    }

    fn best_threshold(&mut self, local: usize, rows: &[usize]) -> Option<(f64, f64)> {
        let col = &self.cols[local];
        self.scratch.clear();
        self.scratch
            .extend(rows.iter().map(|&r| (col[r], self.labels[r])));
        self.scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let vals = &self.scratch;
        if vals.first()?.0 == vals.last()?.0 {
            return None;
        }
        let total_pos = vals.iter().filter(|v| v.1 == 1).count() as u32;
        let total_neg = vals.len() as u32 - total_pos;
        let (mut lneg, mut lpos) = (0u32, 0u32);
        let mut best: Option<(f64, f64)> = None;
        for i in 0..vals.len() - 1 {
            if vals[i].1 == 1 {
                lpos += 1;
            } else {
                lneg += 1;
            }
            let (a, b) = (vals[i].0, vals[i + 1].0);
            if a == b {
                continue;
            }
            let impurity = weighted_gini(lneg, lpos) + weighted_gini(total_neg - lneg, total_pos - lpos);
            if best.is_none_or(|(_, bi)| impurity < bi) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some((threshold, impurity));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::confusion;

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(0.5).unwrap(), 0.5);
        assert_eq!(gini_impurity(0.0).unwrap(), 0.0);
        assert_eq!(gini_impurity(1.0).unwrap(), 0.0);
        assert_eq!(gini_impurity(0.25).unwrap(), 0.375);
        assert!(gini_impurity(-0.1).is_err());
        assert!(gini_impurity(1.5).is_err());
        assert!(gini_impurity(f64::NAN).is_err());
        for i in 0..=100 {
            let p = f64::from(i) / 100.0;
            let g = gini_impurity(p).unwrap();
            assert!((0.0..=0.5).contains(&g));
            assert!((g - gini_impurity(1.0 - p).unwrap()).abs() < 1e-15);
        }
    }

    fn label_copy() -> Dataset {
        let n = 60;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        let rows = (0..n)
            .map(|i| {
                vec![
                    f64::from(labels[i]),
                    ((i * 7919) % 101) as f64 / 101.0,
                    ((i * 104_729) % 53) as f64 / 53.0,
                ]
            })
            .collect();
        Dataset::from_rows(vec!["y".into(), "a".into(), "b".into()], rows, labels, "lc").unwrap()
    }

    #[test]
    fn label_copy_feature_dominates() {
        let d = label_copy();
        let f = d.all_features();
        let m = train_random_forest(&d, &f, &ForestConfig::with_trees(30)).unwrap();
        assert_eq!(m.trees.len(), 30);
        let pred = m.predict(&d, &f).unwrap();
        assert_eq!(pred, d.labels());
        let imp0 = m.importance_of(0).unwrap();
        assert!(m.importances.iter().all(|&v| v >= 0.0 && v <= imp0));
        assert!((m.importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_perfect_feature_predicts_perfectly() {
        let d = label_copy();
        let f: FeatureSet = [0].into_iter().collect();
        let m = train_random_forest(&d, &f, &ForestConfig::with_trees(5)).unwrap();
        let cm = confusion(d.labels(), &m.predict(&d, &f).unwrap()).unwrap();
        assert_eq!(cm.fp + cm.fn_, 0);
        assert_eq!(m.importances, vec![1.0]);
        assert!(m.trees.iter().all(|t| t.depth() == 1));
    }

    #[test]
    fn unused_features_have_zero_importance() {
        // column 1 is constant inside every node, so it can never split
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let rows = (0..20).map(|i| vec![i as f64, 3.0]).collect();
        let d = Dataset::from_rows(vec!["x".into(), "c".into()], rows, labels, "z").unwrap();
        let f = d.all_features();
        let m = train_random_forest(&d, &f, &ForestConfig::with_trees(10)).unwrap();
        assert_eq!(m.importance_of(1), Some(0.0));
        for t in &m.trees {
            for node in &t.nodes {
                if let Node::Split { feature, .. } = node {
                    assert!(f.contains(*feature));
                    assert_eq!(*feature, 0);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let d = label_copy();
        let f = d.all_features();
        let cfg = ForestConfig {
            n_trees: 12,
            seed: 99,
            ..Default::default()
        };
        let a = train_random_forest(&d, &f, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| train_random_forest(&d, &f, &cfg).unwrap());
        assert_eq!(a, b);
        let json = super::super::Model::Forest(a.clone()).to_json().unwrap();
        assert!(json.contains("\"model_version\": 1"));
        assert_eq!(super::super::Model::from_json(&json).unwrap(), super::super::Model::Forest(a));
    }

    #[test]
    fn default_has_hundred_trees() {
        assert_eq!(ForestConfig::default().n_trees, 100);
        assert_eq!(ForestConfig::default().subsample(15), 4);
        assert_eq!(ForestConfig::default().subsample(1), 1);
    }

    #[test]
    fn row_order_is_irrelevant_after_canonical_sort() {
        let d = label_copy();
        let mut rev: Vec<usize> = (0..d.n_rows()).collect();
        rev.reverse();
        let shuffled = d.subset_rows(&rev);
        let f = d.all_features();
        let cfg = ForestConfig::with_trees(6);
        let a = train_random_forest(&d.canonical_sort(), &f, &cfg).unwrap();
        let b = train_random_forest(&shuffled.canonical_sort(), &f, &cfg).unwrap();
        assert_eq!(a.trees, b.trees);
    }
}
