use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::Prepared;
use super::timing::timing_curve;
use super::{CvScore, Metrics};
use crate::config::RunConfig;
use crate::dataset::OneHotEncoder;
use crate::ensemble::{trajectories_csv, EnsembleTrajectory, Heuristic};
use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::selectors::{CorrelationReport, EliminationTrace, SelectorKind};

/// Self-describing record of a run: full config echo, seeds and data
/// provenance, including which dataset every training-phase computation read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub config: RunConfig,
    pub train_provenance: String,
    pub test_provenance: String,
    pub n_train: usize,
    pub n_test: usize,
    pub feature_names: Vec<String>,
    pub dropped_constant: Vec<String>,
    pub onehot_encoders: Vec<OneHotEncoder>,
    pub selection_features: FeatureSet,
    pub onehot_features: FeatureSet,
    pub trace_provenance: Vec<(SelectorKind, String)>,
    pub cv_provenance: String,
}

impl Manifest {
    pub(crate) fn new(config: &RunConfig, p: &Prepared, traces: &[EliminationTrace]) -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: config.seed,
            config: config.clone(),
            train_provenance: p.train.provenance().to_string(),
            test_provenance: p.test.provenance().to_string(),
            n_train: p.train.n_rows(),
            n_test: p.test.n_rows(),
            feature_names: p.train.columns().iter().map(|c| c.name.clone()).collect(),
            dropped_constant: p.train.dropped_constant().to_vec(),
            onehot_encoders: p.encoders.clone(),
            selection_features: p.selection.clone(),
            onehot_features: p.onehot.clone(),
            trace_provenance: traces
                .iter()
                .map(|t| (t.selector, t.provenance.clone()))
                .collect(),
            cv_provenance: p.train.provenance().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub selector: SelectorKind,
    pub iteration: usize,
    pub n_features: usize,
    /// `None` marks a skipped (empty) set.
    pub score: Option<CvScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub heuristic: Heuristic,
    pub iteration: usize,
    pub size: usize,
    /// Combined candidate before any one-hot augmentation.
    pub features: FeatureSet,
    pub augmented: bool,
    pub learner: String,
    /// `None` marks a skipped (empty) candidate.
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScope {
    /// Pre-filter kept set (plus one-hot block when augmenting).
    Kept,
    /// Every numeric feature (plus one-hot block when augmenting).
    AllNumeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub learner: String,
    pub scope: BaselineScope,
    pub features: FeatureSet,
    pub metrics: Metrics,
}

/// One trained-and-tested (learner, feature set) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub learner: String,
    pub features: FeatureSet,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub manifest: Manifest,
    pub prefilter: CorrelationReport,
    pub traces: Vec<EliminationTrace>,
    pub trajectories: Vec<EnsembleTrajectory>,
    pub cv_curves: Vec<CvPoint>,
    pub candidates: Vec<CandidateResult>,
    pub baselines: Vec<BaselineResult>,
    pub evaluations: Vec<Evaluation>,
}

impl EvaluationReport {
    /// Copy with every wall-clock field zeroed, for determinism checks.
    pub fn without_timing(&self) -> EvaluationReport {
        let mut r = self.clone();
        for c in &mut r.candidates {
            if let Some(m) = &mut c.metrics {
                *m = m.without_timing();
            }
        }
        for b in &mut r.baselines {
            b.metrics = b.metrics.without_timing();
        }
        for e in &mut r.evaluations {
            e.metrics = e.metrics.without_timing();
        }
        r
    }

    pub fn baseline(&self, learner: &str, scope: BaselineScope) -> Option<&BaselineResult> {
        self.baselines
            .iter()
            .find(|b| b.learner == learner && b.scope == scope)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub struct OutputFile {
    pub name: &'static str,
    pub contents: String,
}

fn csv_string<F>(header: &[&str], fill: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders every report artifact in memory. Skipped rows carry empty metric
/// cells and `status = skipped`.
pub fn render_outputs(report: &EvaluationReport) -> Result<Vec<OutputFile>> {
    let cv = csv_string(&["selector", "iteration", "mean", "stdev"], |w| {
        for p in &report.cv_curves {
            w.write_record([
                p.selector.to_string(),
                p.iteration.to_string(),
                opt(p.score.map(|s| s.mean)),
                opt(p.score.map(|s| s.stdev)),
            ])?;
        }
        Ok(())
    })?;
    let curves = csv_string(
        &["heuristic", "iteration", "size", "learner", "f1", "accuracy", "status"],
        |w| {
            for c in &report.candidates {
                w.write_record([
                    c.heuristic.name().to_string(),
                    c.iteration.to_string(),
                    c.size.to_string(),
                    c.learner.clone(),
                    opt(c.metrics.as_ref().map(|m| m.f1)),
                    opt(c.metrics.as_ref().map(|m| m.accuracy)),
                    if c.metrics.is_some() { "ok" } else { "skipped" }.to_string(),
                ])?;
            }
            Ok(())
        },
    )?;
    let timing = csv_string(&["learner", "n_features", "train_seconds", "test_seconds"], |w| {
        for r in timing_curve(report) {
            w.write_record([
                r.learner,
                r.n_features.to_string(),
                r.train_seconds.to_string(),
                r.test_seconds.to_string(),
            ])?;
        }
        Ok(())
    })?;
    Ok(vec![
        OutputFile {
            name: "manifest.json",
            contents: serde_json::to_string_pretty(&report.manifest)?,
        },
        OutputFile {
            name: "report.json",
            contents: report.to_json()?,
        },
        OutputFile {
            name: "cv_curves.csv",
            contents: cv,
        },
        OutputFile {
            name: "heuristic_curves.csv",
            contents: curves,
        },
        OutputFile {
            name: "timing.csv",
            contents: timing,
        },
        OutputFile {
            name: "trajectories.csv",
            contents: trajectories_csv(&report.trajectories, &report.manifest.feature_names)?,
        },
    ])
}

/// Writes rendered files into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    for f in files {
        let path = dir.join(f.name);
        fs::write(&path, &f.contents).map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}
