//! Set-theoretic combination of the selectors' surviving sets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureSet;
use crate::selectors::EliminationTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Heuristic {
    /// Features suggested by any selector.
    Union,
    /// Features kept by every selector.
    Intersection,
    /// Features kept by at least `threshold` selectors.
    Quorum { threshold: usize },
}

impl Heuristic {
    /// Strict-majority quorum for `k` selectors: floor(k/2) + 1.
    pub fn majority(k: usize) -> Self {
        Heuristic::Quorum {
            threshold: k / 2 + 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::Union => "union",
            Heuristic::Intersection => "intersection",
            Heuristic::Quorum { .. } => "quorum",
        }
    }

    /// Minimum number of selectors that must keep a feature, given `k`.
    fn required(&self, k: usize) -> usize {
        match *self {
            Heuristic::Union => 1,
            Heuristic::Intersection => k,
            Heuristic::Quorum { threshold } => threshold,
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `union`, `intersection`, `quorum` (strict majority of `k`) or
/// `quorum:<n>`.
pub fn parse_heuristic(s: &str, k: usize) -> Result<Heuristic> {
    let s = s.trim().to_ascii_lowercase();
    match s.as_str() {
        "union" => Ok(Heuristic::Union),
        "intersection" => Ok(Heuristic::Intersection),
        "quorum" => Ok(Heuristic::majority(k)),
        other => match other.strip_prefix("quorum:").map(usize::from_str) {
            Some(Ok(threshold)) => Ok(Heuristic::Quorum { threshold }),
            _ => Err(Error::Config(format!("unknown heuristic `{s}`"))),
        },
    }
}

fn check_traces(traces: &[EliminationTrace]) -> Result<&FeatureSet> {
    let first = traces
        .first()
        .ok_or_else(|| Error::invalid("no traces to combine"))?;
    if let Some(bad) = traces.iter().find(|t| t.start_set != first.start_set) {
        return Err(Error::invalid(format!(
            "{} trace starts from {} but {} starts from {}",
            bad.selector, bad.start_set, first.selector, first.start_set
        )));
    }
    Ok(&first.start_set)
}

fn check_threshold(h: Heuristic, k: usize) -> Result<()> {
    let need = h.required(k);
    if need == 0 || need > k {
        return Err(Error::invalid(format!(
            "quorum threshold {need} outside 1..={k}"
        )));
    }
    Ok(())
}

fn vote(sets: &[FeatureSet], need: usize) -> FeatureSet {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in sets {
        for id in s {
            *counts.entry(id).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= need)
        .map(|(id, _)| id)
        .collect()
}

/// Combined candidate at iteration `t`.
pub fn combine(traces: &[EliminationTrace], t: usize, h: Heuristic) -> Result<FeatureSet> {
    check_traces(traces)?;
    check_threshold(h, traces.len())?;
    let sets = traces
        .iter()
        .map(|tr| tr.surviving(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(vote(&sets, h.required(traces.len())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub candidate: FeatureSet,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleTrajectory {
    pub heuristic: Heuristic,
    pub per_iteration: Vec<TrajectoryPoint>,
}

/// Applies [`combine`] at every iteration `0..m`.
pub fn build_trajectory(traces: &[EliminationTrace], h: Heuristic) -> Result<EnsembleTrajectory> {
    let start = check_traces(traces)?;
    check_threshold(h, traces.len())?;
    for t in traces {
        t.validate()?;
    }
    let per_trace: Vec<Vec<FeatureSet>> = traces.iter().map(|t| t.surviving_sets()).collect();
    let need = h.required(traces.len());
    let per_iteration = (0..start.len())
        .map(|t| {
            let sets: Vec<FeatureSet> = per_trace.iter().map(|s| s[t].clone()).collect();
            let candidate = vote(&sets, need);
            TrajectoryPoint {
                iteration: t,
                size: candidate.len(),
                candidate,
            }
        })
        .collect();
    Ok(EnsembleTrajectory {
        heuristic: h,
        per_iteration,
    })
}

/// Adds the one-hot block to a candidate set.
pub fn augment_with_onehot(candidate: &FeatureSet, onehot_block: &FeatureSet) -> Result<FeatureSet> {
    if !candidate.is_disjoint(onehot_block) {
        return Err(Error::invalid(format!(
            "one-hot block {onehot_block} overlaps candidate {candidate}"
        )));
    }
    Ok(candidate.union(onehot_block))
}

/// Flat CSV rows `iteration,heuristic,size,features` with comma-joined
/// feature names.
pub fn trajectories_csv(trajectories: &[EnsembleTrajectory], names: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "heuristic", "size", "features"])?;
    for tr in trajectories {
        for p in &tr.per_iteration {
            w.write_record([
                p.iteration.to_string(),
                tr.heuristic.name().to_string(),
                p.size.to_string(),
                p.candidate
                    .iter()
                    .map(|id| names.get(id).map_or("?", String::as_str))
                    .collect::<Vec<_>>()
                    .join(","),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serde(e.to_string()))
}
