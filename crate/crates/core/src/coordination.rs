//! The average coordination measure and window-length selection.
//!
//! Coordination of a clustering is the mean pairwise similarity over ordered
//! pairs that share a cluster. Per time step the clusters are the assigned
//! factions plus one residual cluster of unassigned series, and the window
//! length whose median per-step value is largest wins.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factions::FactionTimeline;
use crate::network::{DynamicNetwork, NetworkOptions, ScoreMatrix};
use crate::pipeline::infer;
use crate::series::Dataset;

/// Pairwise similarity in `[0, 1]`.
pub trait Similarity {
    fn n(&self) -> usize;
    fn similarity(&self, i: usize, j: usize) -> f64;
}

impl Similarity for ScoreMatrix {
    fn n(&self) -> usize {
        ScoreMatrix::n(self)
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        ScoreMatrix::similarity(self, i, j)
    }
}

/// Dense symmetric similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.n + j] = value;
        self.values[j * self.n + i] = value;
    }
}

impl Similarity for SimMatrix {
    fn n(&self) -> usize {
        self.n
    }

    fn similarity(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Hard partition of `n` series into labelled clusters.
///
/// Labels are canonical: cluster labels are numbered by first appearance, so
/// two clusterings with the same groups compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clustering {
    labels: Vec<usize>,
}

impl Clustering {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels }
    }

    /// Every index in `0..n` must appear in exactly one group.
    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &m in members {
                if m >= n {
                    return Err(Error::InvalidParameter(format!("member {m} outside 0..{n}")));
                }
                if labels[m] != usize::MAX {
                    return Err(Error::InvalidParameter(format!("member {m} appears twice")));
                }
                labels[m] = g;
            }
        }
        if let Some(m) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidParameter(format!("member {m} is in no cluster")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn same(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Members of each cluster, ascending, in label order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.cluster_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups
    }
}

/// Mean similarity over ordered same-cluster pairs; 0 when every cluster is
/// a singleton.
pub fn coordination_measure(clustering: &Clustering, sim: &impl Similarity) -> f64 {
    let n = clustering.n();
    debug_assert_eq!(n, sim.n());
    let mut total = 0.0;
    let mut pairs = 0usize;
    for group in clustering.groups() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                total += sim.similarity(i, j);
                pairs += 1;
            }
        }
    }
    // Ordered pairs double both sums, so unordered pairs give the same ratio.
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Clusters at one step: each assigned faction, then the unassigned rest.
pub fn step_clustering(assignment: &[Option<usize>]) -> Clustering {
    let n = assignment.len();
    let labels: Vec<usize> = assignment.iter().map(|a| a.unwrap_or(n)).collect();
    Clustering::from_labels(&labels)
}

/// Coordination at every step `1..=t*`, using each block's own scores.
pub fn per_step_measure(dynamic: &DynamicNetwork, timeline: &FactionTimeline) -> Result<Vec<f64>> {
    if timeline.len() != dynamic.len() || timeline.n() != dynamic.n() {
        return Err(Error::Mismatch("timeline and dynamic network disagree in shape".into()));
    }
    let mut out = Vec::with_capacity(dynamic.len());
    for block in dynamic.blocks() {
        let mut cached: Option<(&[Option<usize>], f64)> = None;
        for t in block.steps() {
            let assignment = timeline.step(t).assignment.as_slice();
            let psi = match cached {
                Some((a, psi)) if a == assignment => psi,
                _ => coordination_measure(&step_clustering(assignment), &block.scores),
            };
            cached = Some((assignment, psi));
            out.push(psi);
        }
    }
    Ok(out)
}

/// Median, averaging the two middle values for even lengths; NaN when empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowCandidate {
    pub omega: usize,
    pub psi_hat: f64,
}

/// Median coordination for each candidate window and the winner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSweep {
    pub candidates: Vec<WindowCandidate>,
    pub chosen: usize,
}

impl WindowSweep {
    /// Largest median wins; ties go to the smaller window.
    pub fn from_candidates(mut candidates: Vec<WindowCandidate>) -> Result<Self> {
        candidates.sort_by_key(|c| c.omega);
        let best = candidates
            .iter()
            .fold(None::<&WindowCandidate>, |best, c| match best {
                Some(b) if b.psi_hat >= c.psi_hat => Some(b),
                _ => Some(c),
            })
            .ok_or_else(|| Error::InvalidParameter("no window candidates".into()))?;
        let chosen = best.omega;
        Ok(Self { candidates, chosen })
    }
}

/// `t*/80, t*/40, t*/20, t*/10`, rounded, clipped to `[10, t*]`, deduplicated.
pub fn default_window_candidates(t_star: usize) -> Vec<usize> {
    let mut out: Vec<usize> = [80, 40, 20, 10]
        .iter()
        .map(|&d| ((t_star + d / 2) / d).clamp(10.min(t_star), t_star))
        .collect();
    out.dedup();
    out
}

pub fn infer_window(u: &Dataset, candidates: &[usize], sigma: f64) -> Result<WindowSweep> {
    let opts = NetworkOptions {
        sigma,
        ..NetworkOptions::default()
    };
    infer_window_with(u, candidates, &opts)
}

/// Runs the full pipeline once per candidate window length.
pub fn infer_window_with(u: &Dataset, candidates: &[usize], opts: &NetworkOptions) -> Result<WindowSweep> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no window candidates".into()));
    }
    let scored = candidates
        .par_iter()
        .map(|&omega| {
            let inference = infer(u, omega, opts)?;
            let psi = per_step_measure(&inference.dynamic, &inference.timeline)?;
            Ok(WindowCandidate {
                omega,
                psi_hat: median(&psi),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    WindowSweep::from_candidates(scored)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Exchange one member between two clusters.
    Swap,
    /// Move a nonempty proper subset of a cluster into a new cluster.
    Split,
    /// Join two clusters.
    Merge,
}

impl Perturbation {
    pub const ALL: [Perturbation; 3] = [Perturbation::Swap, Perturbation::Split, Perturbation::Merge];
}

/// Applies one seeded random perturbation.
pub fn perturb_clustering(clustering: &Clustering, kind: Perturbation, seed: u64) -> Result<Clustering> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = clustering.groups();
    let mut labels = clustering.labels().to_vec();
    match kind {
        Perturbation::Swap | Perturbation::Merge => {
            if groups.len() < 2 {
                return Err(Error::Perturbation(format!("{kind:?} needs at least two clusters")));
            }
            let picked: Vec<usize> = rand::seq::index::sample(&mut rng, groups.len(), 2).into_vec();
            let (a, b) = (picked[0], picked[1]);
            if kind == Perturbation::Merge {
                for &m in &groups[b] {
                    labels[m] = a;
                }
            } else {
                let x = *groups[a].choose(&mut rng).unwrap();
                let y = *groups[b].choose(&mut rng).unwrap();
                labels.swap(x, y);
            }
        }
        Perturbation::Split => {
            let splittable: Vec<usize> = (0..groups.len()).filter(|&g| groups[g].len() >= 2).collect();
            let &g = splittable
                .choose(&mut rng)
                .ok_or_else(|| Error::Perturbation("Split needs a cluster of size two or more".into()))?;
            let mut members = groups[g].clone();
            members.shuffle(&mut rng);
            let k = rng.random_range(1..members.len());
            let fresh = groups.len();
            for &m in &members[..k] {
                labels[m] = fresh;
            }
        }
    }
    Ok(Clustering::from_labels(&labels))
}
