use std::collections::BTreeMap;

use rayon::prelude::*;

use super::report::{
    BaselineResult, BaselineScope, CandidateResult, CvPoint, Evaluation, EvaluationReport,
    Manifest,
};
use super::{cross_val_score, evaluate_candidate, CvScore, Metrics};
use crate::config::RunConfig;
use crate::dataset::{
    load_csv_with, normalize_minmax, synth_generate, Dataset, LoadOptions, OneHotEncoder, Schema,
};
use crate::ensemble::{augment_with_onehot, build_trajectory};
use crate::error::{Error, Result, Stage, StageExt};
use crate::features::FeatureSet;
use crate::selectors::{
    correlation_prefilter_on, run_selector, selector_seed, CorrelationReport, EliminationTrace,
    SelectorKind,
};
use crate::seed;

/// Encoded, normalized train/test pair ready for selection.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    /// Numeric feature ids; the only columns that enter selection.
    pub selection: FeatureSet,
    /// One-hot columns, optionally appended to every candidate.
    pub onehot: FeatureSet,
    pub encoders: Vec<OneHotEncoder>,
}

/// Load (or generate), one-hot encode with training categories, then
/// min-max normalize both splits with training ranges.
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    let (train, test) = load(config).stage(Stage::Load)?;
    let (train, test, encoders) = encode(train, test).stage(Stage::Encode)?;
    let train_n = normalize_minmax(&train, &train).stage(Stage::Normalize)?;
    let test_n = normalize_minmax(&train, &test).stage(Stage::Normalize)?;
    Ok(Prepared {
        selection: train_n.numeric_features(),
        onehot: train_n.onehot_features(),
        train: train_n,
        test: test_n,
        encoders,
    })
}

fn load(config: &RunConfig) -> Result<(Dataset, Dataset)> {
    if let Some(synth) = &config.synth {
        return synth_generate(&synth.params(config.seed));
    }
    let data = config
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("missing [data] or [synth] table".into()))?;
    let schema = match &data.schema {
        Some(p) => Schema::from_file(p)?,
        None => Schema::new(),
    };
    let sample = |part: &str| {
        data.sample_rows
            .map(|n| (n, seed::derive_str(config.seed, &format!("sample-{part}"))))
    };
    let train = load_csv_with(
        &data.train,
        &schema,
        &data.label,
        &LoadOptions {
            normal_label: data.normal_label.clone(),
            keep_constant: false,
            sample_rows: sample("train"),
        },
    )?;
    let test = load_csv_with(
        &data.test,
        &schema,
        &data.label,
        &LoadOptions {
            normal_label: data.normal_label.clone(),
            keep_constant: true,
            sample_rows: sample("test"),
        },
    )?
    .align_to(&train)?;
    Ok((train, test))
}

fn encode(mut train: Dataset, mut test: Dataset) -> Result<(Dataset, Dataset, Vec<OneHotEncoder>)> {
    let names: Vec<String> = train.categoricals().iter().map(|c| c.name.clone()).collect();
    let mut encoders = Vec::with_capacity(names.len());
    for name in names {
        let enc = OneHotEncoder::fit(&train, &name)?;
        train = enc.transform(&train)?;
        test = enc.transform(&test)?;
        encoders.push(enc);
    }
    Ok((train, test, encoders))
}

pub fn prefilter_stage(p: &Prepared, config: &RunConfig) -> Result<CorrelationReport> {
    correlation_prefilter_on(&p.train, &p.selection, config.prefilter_threshold)
        .stage(Stage::Prefilter)
}

/// One selector's trace over the pre-filter's kept set, on training data.
pub fn trace_stage(
    p: &Prepared,
    kept: &FeatureSet,
    kind: SelectorKind,
    config: &RunConfig,
) -> Result<EliminationTrace> {
    run_selector(
        kind,
        &p.train,
        kept,
        selector_seed(config.seed, kind),
        &config.selector,
    )
    .stage(Stage::Trace)
}

/// All configured selectors, run concurrently, in configuration order.
pub fn traces_stage(
    p: &Prepared,
    kept: &FeatureSet,
    config: &RunConfig,
) -> Result<Vec<EliminationTrace>> {
    config
        .selectors
        .par_iter()
        .map(|&kind| trace_stage(p, kept, kind, config))
        .collect()
}

/// Everything after the traces: trajectories, CV curves, candidate and
/// baseline evaluations.
pub fn assemble_report(
    config: &RunConfig,
    p: &Prepared,
    prefilter: &CorrelationReport,
    traces: Vec<EliminationTrace>,
) -> Result<EvaluationReport> {
    let traces = order_traces(config, prefilter, traces).stage(Stage::Combine)?;
    let heuristics = config.heuristic_list().stage(Stage::Combine)?;
    let trajectories = heuristics
        .iter()
        .map(|&h| build_trajectory(&traces, h))
        .collect::<Result<Vec<_>>>()
        .stage(Stage::Combine)?;

    let cv_curves = cv_curves(config, p, &traces).stage(Stage::CrossValidate)?;

    // Every (learner, feature set) pair is trained once; identical sets
    // across heuristics and iterations share one evaluation.
    let augment = |set: &FeatureSet| -> Result<FeatureSet> {
        if config.onehot_augment {
            augment_with_onehot(set, &p.onehot)
        } else {
            Ok(set.clone())
        }
    };
    let kept_set = augment(&prefilter.kept).stage(Stage::Evaluate)?;
    let numeric_set = augment(&p.selection).stage(Stage::Evaluate)?;
    let mut wanted: BTreeMap<(usize, FeatureSet), ()> = BTreeMap::new();
    for (li, _) in config.learners.iter().enumerate() {
        wanted.insert((li, kept_set.clone()), ());
        wanted.insert((li, numeric_set.clone()), ());
        for tr in &trajectories {
            for pt in &tr.per_iteration {
                if !pt.candidate.is_empty() {
                    wanted.insert((li, augment(&pt.candidate).stage(Stage::Evaluate)?), ());
                }
            }
        }
    }
    let keys: Vec<(usize, FeatureSet)> = wanted.into_keys().collect();
    let results: Vec<Metrics> = keys
        .par_iter()
        .map(|(li, set)| {
            let kind = config.learners[*li];
            let learner = config
                .learner(kind)
                .with_seed(seed::derive_str(config.seed, &format!("eval:{}", kind.as_str())));
            evaluate_candidate(&p.train, &p.test, set, &learner)
                .map(|m| m.expect("only nonempty sets are evaluated"))
        })
        .collect::<Result<_>>()
        .stage(Stage::Evaluate)?;
    let lookup: BTreeMap<(usize, FeatureSet), Metrics> = keys.into_iter().zip(results).collect();
    let metrics_for = |li: usize, set: &FeatureSet| lookup[&(li, set.clone())].clone();

    let mut candidates = Vec::new();
    for tr in &trajectories {
        for pt in &tr.per_iteration {
            for (li, kind) in config.learners.iter().enumerate() {
                let evaluated = if pt.candidate.is_empty() {
                    None
                } else {
                    Some(augment(&pt.candidate).map(|s| metrics_for(li, &s))?)
                };
                candidates.push(CandidateResult {
                    heuristic: tr.heuristic,
                    iteration: pt.iteration,
                    size: pt.size,
                    features: pt.candidate.clone(),
                    augmented: config.onehot_augment,
                    learner: kind.as_str().to_string(),
                    metrics: evaluated,
                });
            }
        }
    }
    let mut baselines = Vec::new();
    for (li, kind) in config.learners.iter().enumerate() {
        for (scope, set) in [
            (BaselineScope::Kept, &kept_set),
            (BaselineScope::AllNumeric, &numeric_set),
        ] {
            baselines.push(BaselineResult {
                learner: kind.as_str().to_string(),
                scope,
                features: set.clone(),
                metrics: metrics_for(li, set),
            });
        }
    }
    let evaluations = lookup
        .into_iter()
        .map(|((li, features), metrics)| Evaluation {
            learner: config.learners[li].as_str().to_string(),
            features,
            metrics,
        })
        .collect();

    let manifest = Manifest::new(config, p, &traces);
    Ok(EvaluationReport {
        manifest,
        prefilter: prefilter.clone(),
        traces,
        trajectories,
        cv_curves,
        candidates,
        baselines,
        evaluations,
    })
}

/// Checks traces against the pre-filter and the configured roster, and puts
/// them in roster order.
fn order_traces(
    config: &RunConfig,
    prefilter: &CorrelationReport,
    traces: Vec<EliminationTrace>,
) -> Result<Vec<EliminationTrace>> {
    let mut by_kind: BTreeMap<SelectorKind, EliminationTrace> = BTreeMap::new();
    for t in traces {
        t.validate()?;
        if t.start_set != prefilter.kept {
            return Err(Error::invalid(format!(
                "{} trace does not start from the pre-filter's kept set",
                t.selector
            )));
        }
        if by_kind.insert(t.selector, t).is_some() {
            return Err(Error::invalid("two traces from the same selector"));
        }
    }
    let ordered = config
        .selectors
        .iter()
        .map(|k| {
            by_kind
                .remove(k)
                .ok_or_else(|| Error::invalid(format!("missing trace for selector {k}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(extra) = by_kind.keys().next() {
        return Err(Error::invalid(format!("trace for unconfigured selector {extra}")));
    }
    Ok(ordered)
}

/// Per-selector, per-iteration CV score of the surviving set. One fold plan
/// and learner seed serve every set, so equal sets score equally and are
/// computed once.
fn cv_curves(
    config: &RunConfig,
    p: &Prepared,
    traces: &[EliminationTrace],
) -> Result<Vec<CvPoint>> {
    let learner = config.learner(config.cv_learner);
    let cv_seed = seed::derive_str(config.seed, "cv");
    let mut unique: BTreeMap<FeatureSet, ()> = BTreeMap::new();
    for t in traces {
        for s in t.surviving_sets() {
            unique.insert(s, ());
        }
    }
    let sets: Vec<FeatureSet> = unique.into_keys().collect();
    let scores: Vec<Option<CvScore>> = sets
        .par_iter()
        .map(|s| cross_val_score(&p.train, s, &learner, config.cv_folds, cv_seed))
        .collect::<Result<_>>()?;
    let lookup: BTreeMap<FeatureSet, Option<CvScore>> = sets.into_iter().zip(scores).collect();
    Ok(traces
        .iter()
        .flat_map(|t| {
            t.surviving_sets()
                .into_iter()
                .enumerate()
                .map(|(iteration, s)| CvPoint {
                    selector: t.selector,
                    iteration,
                    n_features: s.len(),
                    score: lookup[&s],
                })
                .collect::<Vec<_>>()
        })
        .collect())
}

/// Full pipeline: load, encode, normalize, pre-filter, traces, trajectories,
/// CV curves, candidate evaluations and baselines.
pub fn run_experiment(config: &RunConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let p = prepare(config)?;
    let prefilter = prefilter_stage(&p, config)?;
    log::info!(
        "pre-filter kept {} of {} numeric features",
        prefilter.kept.len(),
        p.selection.len()
    );
    let traces = traces_stage(&p, &prefilter.kept, config)?;
    assemble_report(config, &p, &prefilter, traces)
}
