//! Factions, initiators and faction intervals read off following networks.
//!
//! An initiator is a node that follows nobody and is followed by at least
//! one node. Its faction is every node with a directed path to it, so a node
//! may belong to several factions at once. [`assign_individuals`] resolves
//! such overlaps to a single faction per node.

mod events;
mod export;
mod pagerank;

use std::collections::{BTreeMap, VecDeque};

pub use events::{detect_merge_split, EventKind, FactionEvent};
pub use export::{write_size_ratio_trace, EventExport, FactionExport, IntervalExport, StepExport, TimelineExport};
pub use pagerank::{pagerank, pagerank_with, PageRankOptions, DEFAULT_DAMPING};

use crate::error::{Error, Result};
use crate::network::{DynamicNetwork, FollowingNetwork};

/// Nodes with out-degree zero and in-degree at least one, ascending.
pub fn find_initiators(net: &FollowingNetwork) -> Vec<usize> {
    (0..net.n())
        .filter(|&v| net.out_degree(v) == 0 && net.in_degree(v) > 0)
        .collect()
}

/// The initiator plus every node with a directed path to it, ascending.
pub fn find_faction(net: &FollowingNetwork, initiator: usize) -> Result<Vec<usize>> {
    if initiator >= net.n() || net.out_degree(initiator) != 0 || net.in_degree(initiator) == 0 {
        return Err(Error::NotInitiator(initiator));
    }
    Ok(reaching(net, initiator))
}

/// Breadth-first search along reversed edges.
fn reaching(net: &FollowingNetwork, target: usize) -> Vec<usize> {
    let mut seen = vec![false; net.n()];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for k in net.in_neighbors(v) {
            if !seen[k] {
                seen[k] = true;
                queue.push_back(k);
            }
        }
    }
    (0..net.n()).filter(|&v| seen[v]).collect()
}

/// Edges of the subgraph induced by `members`, over `C(n, 2)`.
pub fn faction_size_ratio(net: &FollowingNetwork, members: &[usize]) -> f64 {
    let n = net.n();
    if n < 2 {
        return 0.0;
    }
    let mut inside = vec![false; n];
    for &m in members {
        inside[m] = true;
    }
    let induced = net
        .edges()
        .filter(|&(from, to, _)| inside[from] && inside[to])
        .count();
    induced as f64 / (n * (n - 1) / 2) as f64
}

/// One faction at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FactionSnapshot {
    /// 1-based time step.
    pub t: usize,
    pub initiator: usize,
    /// Ascending node indices, initiator included.
    pub members: Vec<usize>,
    pub size_ratio: f64,
    /// Whole-network PageRank scores restricted to the members.
    pub ranks: BTreeMap<usize, f64>,
}

impl FactionSnapshot {
    /// Members by descending rank score, ties by ascending node.
    pub fn ranked_members(&self) -> Vec<usize> {
        order_by_scores(&self.members, |v| self.ranks[&v])
    }
}

fn order_by_scores(members: &[usize], score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut order = members.to_vec();
    order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    order
}

/// All factions at one step plus the single-faction assignment of each node.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelineStep {
    pub t: usize,
    pub factions: Vec<FactionSnapshot>,
    /// Initiator each node is attributed to, if any.
    pub assignment: Vec<Option<usize>>,
}

impl TimelineStep {
    pub fn initiators(&self) -> impl Iterator<Item = usize> + '_ {
        self.factions.iter().map(|f| f.initiator)
    }

    pub fn faction_of(&self, initiator: usize) -> Option<&FactionSnapshot> {
        self.factions.iter().find(|f| f.initiator == initiator)
    }
}

/// Maximal run of 1-based steps `start..=end` in which `initiator` leads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactionInterval {
    pub initiator: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactionTimeline {
    n: usize,
    steps: Vec<TimelineStep>,
    intervals: Vec<FactionInterval>,
}

impl FactionTimeline {
    /// Assembles a timeline from consecutive steps starting at `t = 1`.
    pub fn from_steps(n: usize, steps: Vec<TimelineStep>) -> Result<Self> {
        if let Some((k, s)) = steps.iter().enumerate().find(|(k, s)| s.t != k + 1) {
            return Err(Error::InvalidParameter(format!(
                "step {} found at position {k}",
                s.t
            )));
        }
        if steps.iter().any(|s| s.assignment.len() != n) {
            return Err(Error::InvalidParameter("assignment length must equal n".into()));
        }
        let intervals = faction_intervals(&steps);
        Ok(Self {
            n,
            steps,
            intervals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[TimelineStep] {
        &self.steps
    }

    /// Step at 1-based time `t`.
    pub fn step(&self, t: usize) -> &TimelineStep {
        &self.steps[t - 1]
    }

    pub fn intervals(&self) -> &[FactionInterval] {
        &self.intervals
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let mut factions: Vec<FactionSnapshot> = s
                    .factions
                    .iter()
                    .map(|f| {
                        let mut members: Vec<usize> = f.members.iter().map(|&m| perm[m]).collect();
                        members.sort_unstable();
                        FactionSnapshot {
                            t: f.t,
                            initiator: perm[f.initiator],
                            members,
                            size_ratio: f.size_ratio,
                            ranks: f.ranks.iter().map(|(&k, &v)| (perm[k], v)).collect(),
                        }
                    })
                    .collect();
                factions.sort_by_key(|f| f.initiator);
                let mut assignment = vec![None; self.n];
                for (old, a) in s.assignment.iter().enumerate() {
                    assignment[perm[old]] = a.map(|l| perm[l]);
                }
                TimelineStep {
                    t: s.t,
                    factions,
                    assignment,
                }
            })
            .collect();
        Self::from_steps(self.n, steps).expect("relabeling preserves structure")
    }
}

/// Maximal runs per initiator, ordered by initiator then start.
fn faction_intervals(steps: &[TimelineStep]) -> Vec<FactionInterval> {
    let mut open: BTreeMap<usize, usize> = BTreeMap::new();
    let mut done = Vec::new();
    for s in steps {
        let leading: Vec<usize> = s.initiators().collect();
        let ended: Vec<usize> = open
            .keys()
            .copied()
            .filter(|l| !leading.contains(l))
            .collect();
        for l in ended {
            let start = open.remove(&l).unwrap();
            done.push(FactionInterval {
                initiator: l,
                start,
                end: s.t - 1,
            });
        }
        for l in leading {
            open.entry(l).or_insert(s.t);
        }
    }
    let last = steps.last().map_or(0, |s| s.t);
    done.extend(open.into_iter().map(|(initiator, start)| FactionInterval {
        initiator,
        start,
        end: last,
    }));
    done.sort_by_key(|iv| (iv.initiator, iv.start));
    done
}

/// Attributes every node to at most one faction.
///
/// An initiator belongs to its own faction. Any other node picks, among the
/// factions containing it, the one whose members it follows with the
/// heaviest single edge; ties go to the lower initiator index.
pub fn assign_individuals(net: &FollowingNetwork, factions: &[(usize, Vec<usize>)]) -> Vec<Option<usize>> {
    let n = net.n();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    for (initiator, members) in factions {
        let mut inside = vec![false; n];
        for &m in members {
            inside[m] = true;
        }
        for &v in members {
            let hop = if v == *initiator {
                f64::INFINITY
            } else {
                net.out_neighbors(v)
                    .filter(|&u| inside[u])
                    .map(|u| net.weight(v, u))
                    .fold(0.0, f64::max)
            };
            let better = match best[v] {
                None => true,
                Some((w, l)) => hop > w || (hop == w && *initiator < l),
            };
            if better {
                best[v] = Some((hop, *initiator));
            }
        }
    }
    best.into_iter().map(|b| b.map(|(_, l)| l)).collect()
}

/// Factions of one network, with PageRank computed on the whole network.
pub fn snapshot_factions(net: &FollowingNetwork, t: usize, damping: f64) -> Result<TimelineStep> {
    let initiators = find_initiators(net);
    let groups: Vec<(usize, Vec<usize>)> = initiators
        .iter()
        .map(|&l| Ok((l, find_faction(net, l)?)))
        .collect::<Result<_>>()?;
    let scores = if groups.is_empty() {
        Vec::new()
    } else {
        pagerank(net, damping)?
    };
    let assignment = assign_individuals(net, &groups);
    let factions = groups
        .into_iter()
        .map(|(initiator, members)| FactionSnapshot {
            t,
            initiator,
            size_ratio: faction_size_ratio(net, &members),
            ranks: members.iter().map(|&m| (m, scores[m])).collect(),
            members,
        })
        .collect();
    Ok(TimelineStep {
        t,
        factions,
        assignment,
    })
}

/// Per-step factions and initiators with maximal faction intervals.
pub fn find_factions_and_initiators(dynamic: &DynamicNetwork) -> Result<FactionTimeline> {
    find_factions_with_damping(dynamic, DEFAULT_DAMPING)
}

pub fn find_factions_with_damping(dynamic: &DynamicNetwork, damping: f64) -> Result<FactionTimeline> {
    let mut steps = Vec::with_capacity(dynamic.len());
    for block in dynamic.blocks() {
        let template = snapshot_factions(&block.network, block.start + 1, damping)?;
        for t in block.steps() {
            let mut step = template.clone();
            step.t = t;
            for f in &mut step.factions {
                f.t = t;
            }
            steps.push(step);
        }
    }
    FactionTimeline::from_steps(dynamic.n(), steps)
}

/// Members of one snapshot ordered by whole-network PageRank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedFaction {
    pub t: usize,
    pub initiator: usize,
    pub order: Vec<usize>,
}

/// Recomputes PageRank per network block and orders each snapshot's
/// members by descending score, ties by ascending node.
pub fn rank_within_factions(timeline: &FactionTimeline, dynamic: &DynamicNetwork) -> Result<Vec<RankedFaction>> {
    if timeline.len() != dynamic.len() || timeline.n() != dynamic.n() {
        return Err(Error::Mismatch("timeline and dynamic network disagree in shape".into()));
    }
    let mut out = Vec::new();
    for block in dynamic.blocks() {
        let scores = pagerank(&block.network, DEFAULT_DAMPING)?;
        for t in block.steps() {
            for f in &timeline.step(t).factions {
                out.push(RankedFaction {
                    t,
                    initiator: f.initiator,
                    order: order_by_scores(&f.members, |v| scores[v]),
                });
            }
        }
    }
    Ok(out)
}
