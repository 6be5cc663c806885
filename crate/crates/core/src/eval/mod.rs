//! Scoring inferred timelines against simulator ground truth, plus the
//! geometric FLOCK baseline and a static centrality comparison.

mod centrality;
mod flock;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use centrality::{centrality_comparison, closeness, initiator_support, jaccard, top_k, CentralityComparison};
pub use flock::{flock_grid, flock_network, flock_timeline, median_step_length, FlockParams, GridResult};

use crate::coordination::median;
use crate::error::{Error, Result};
use crate::factions::FactionTimeline;
use crate::sim::GroundTruth;

fn check_shape(pred: &FactionTimeline, truth: &GroundTruth) -> Result<()> {
    if pred.n() != truth.n() || pred.len() != truth.len() {
        return Err(Error::Mismatch(format!(
            "prediction covers {} individuals over {} steps, truth {} over {}",
            pred.n(),
            pred.len(),
            truth.n(),
            truth.len()
        )));
    }
    Ok(())
}

/// Fraction of individuals attributed to the right faction at step `t`.
///
/// A prediction is right when the predicted initiator is one of the true
/// faction's informed individuals, which outside the crowd model is just its
/// leader. Unassigned individuals are right only when truth leaves them
/// unassigned too.
pub fn assignment_accuracy(pred: &FactionTimeline, truth: &GroundTruth, t: usize) -> Result<f64> {
    check_shape(pred, truth)?;
    let predicted = &pred.step(t).assignment;
    let mut faction_of = vec![None; truth.n()];
    for f in truth.factions_at(t) {
        for &m in &f.members {
            faction_of[m] = Some(f);
        }
    }
    let right = predicted
        .iter()
        .zip(&faction_of)
        .filter(|(p, f)| match (p, f) {
            (None, None) => true,
            (Some(l), Some(f)) => f.informed.contains(l),
            _ => false,
        })
        .count();
    Ok(right as f64 / truth.n() as f64)
}

/// Median of [`assignment_accuracy`] over every step.
pub fn timeline_accuracy(pred: &FactionTimeline, truth: &GroundTruth) -> Result<f64> {
    check_shape(pred, truth)?;
    let per_step = (1..=truth.len())
        .map(|t| assignment_accuracy(pred, truth, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(median(&per_step))
}

/// Accumulated leader-identification counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F1Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl F1Counts {
    /// `2TP / (2TP + FP + FN)`, and 1 when there was nothing to find.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }

    pub fn add(&mut self, other: F1Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }
}

/// Counts at one step for a set of predicted leaders.
///
/// A predicted leader is a hit when it is informed in its own true faction.
/// A true faction is missed when none of its informed individuals is
/// predicted.
pub fn leader_counts(predicted: &[usize], truth: &GroundTruth, t: usize) -> F1Counts {
    let factions = truth.factions_at(t);
    let tp = predicted
        .iter()
        .filter(|l| factions.iter().any(|f| f.informed.contains(l)))
        .count();
    let found = factions
        .iter()
        .filter(|f| f.informed.iter().any(|i| predicted.contains(i)))
        .count();
    F1Counts {
        tp,
        fp: predicted.len() - tp,
        fn_: factions.len() - found,
    }
}

/// Counts accumulated over all steps except those where everyone is stopped.
pub fn leadership_counts(pred: &FactionTimeline, truth: &GroundTruth) -> Result<F1Counts> {
    check_shape(pred, truth)?;
    let mut total = F1Counts::default();
    for t in 1..=truth.len() {
        if truth.is_stopped(t) {
            continue;
        }
        let leaders: Vec<usize> = pred.step(t).initiators().collect();
        total.add(leader_counts(&leaders, truth, t));
    }
    Ok(total)
}

pub fn leadership_f1(pred: &FactionTimeline, truth: &GroundTruth) -> Result<f64> {
    Ok(leadership_counts(pred, truth)?.f1())
}

/// `|top-k(predicted) & top-k(truth)| / k` for one ranked faction.
pub fn topk_overlap(predicted: &[usize], truth: &[usize], k: usize) -> Option<f64> {
    if predicted.len() < k || truth.len() < k || k == 0 {
        return None;
    }
    let hits = predicted[..k].iter().filter(|v| truth[..k].contains(v)).count();
    Some(hits as f64 / k as f64)
}

/// Median top-`k` overlap between PageRank order and the true hierarchy.
///
/// Each predicted faction is compared with the true faction containing its
/// initiator. Factions smaller than `k` on either side are skipped. Returns
/// `None` when no snapshot qualifies or the truth has no hierarchy.
pub fn topk_rank_accuracy(pred: &FactionTimeline, truth: &GroundTruth, k: usize) -> Result<Option<f64>> {
    check_shape(pred, truth)?;
    let mut scores = Vec::new();
    for step in pred.steps() {
        let factions = truth.factions_at(step.t);
        for f in &step.factions {
            let Some(tf) = factions.iter().find(|tf| tf.members.contains(&f.initiator)) else {
                continue;
            };
            let Some(chain) = &tf.hierarchy else { continue };
            if let Some(s) = topk_overlap(&f.ranked_members(), chain, k) {
                scores.push(s);
            }
        }
    }
    Ok((!scores.is_empty()).then(|| median(&scores)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEval {
    pub label: String,
    pub accuracy: f64,
    pub f1: f64,
    pub counts: F1Counts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top3: Option<f64>,
}

impl DatasetEval {
    pub fn new(label: impl Into<String>, pred: &FactionTimeline, truth: &GroundTruth) -> Result<Self> {
        let counts = leadership_counts(pred, truth)?;
        Ok(Self {
            label: label.into(),
            accuracy: timeline_accuracy(pred, truth)?,
            f1: counts.f1(),
            counts,
            top3: topk_rank_accuracy(pred, truth, 3)?,
        })
    }
}

/// Medians across the datasets sharing a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub label: String,
    pub datasets: usize,
    pub accuracy: f64,
    pub f1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub datasets: Vec<DatasetEval>,
    pub aggregates: Vec<Aggregate>,
}

impl EvalReport {
    pub fn new(datasets: Vec<DatasetEval>) -> Self {
        let mut by_label: BTreeMap<&str, Vec<&DatasetEval>> = BTreeMap::new();
        for d in &datasets {
            by_label.entry(&d.label).or_default().push(d);
        }
        let aggregates = by_label
            .into_iter()
            .map(|(label, ds)| {
                let pick = |f: fn(&DatasetEval) -> f64| median(&ds.iter().map(|d| f(d)).collect::<Vec<_>>());
                let top: Vec<f64> = ds.iter().filter_map(|d| d.top3).collect();
                Aggregate {
                    label: label.to_string(),
                    datasets: ds.len(),
                    accuracy: pick(|d| d.accuracy),
                    f1: pick(|d| d.f1),
                    top3: (!top.is_empty()).then(|| median(&top)),
                }
            })
            .collect();
        Self { datasets, aggregates }
    }

    pub fn aggregate(&self, label: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.label == label)
    }
}
