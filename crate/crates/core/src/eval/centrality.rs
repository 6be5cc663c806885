//! Which centrality on one global following network best names the leaders.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::factions::{pagerank, DEFAULT_DAMPING};
use crate::network::{create_following_network, FollowingNetwork};
use crate::series::{default_shift, Dataset};
use crate::sim::GroundTruth;

pub fn jaccard(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

/// Indices of the `k` largest scores, ties to the lower index.
pub fn top_k(scores: &[f64], k: usize) -> BTreeSet<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.into_iter().take(k).collect()
}

/// Closeness toward each node along following edges, scaled by the share of
/// nodes that can reach it so that disconnected graphs stay comparable.
pub fn closeness(net: &FollowingNetwork) -> Vec<f64> {
    let n = net.n();
    (0..n)
        .map(|v| {
            let mut dist = vec![usize::MAX; n];
            dist[v] = 0;
            let mut queue = VecDeque::from([v]);
            while let Some(x) = queue.pop_front() {
                for k in net.in_neighbors(x) {
                    if dist[k] == usize::MAX {
                        dist[k] = dist[x] + 1;
                        queue.push_back(k);
                    }
                }
            }
            let reached: Vec<usize> = dist.iter().copied().filter(|&d| d != usize::MAX && d > 0).collect();
            if reached.is_empty() || n < 2 {
                return 0.0;
            }
            let r = reached.len() as f64;
            let total: usize = reached.iter().sum();
            (r / (n - 1) as f64) * (r / total as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityComparison {
    /// Every individual that leads a faction somewhere in the script.
    pub initiators: BTreeSet<usize>,
    pub pagerank_top: BTreeSet<usize>,
    pub in_degree_top: BTreeSet<usize>,
    pub closeness_top: BTreeSet<usize>,
    pub pagerank: f64,
    pub in_degree: f64,
    pub closeness: f64,
}

/// Builds one network over the whole series and compares each measure's
/// top set, as large as the true initiator set, with the initiators.
pub fn centrality_comparison(u: &Dataset, truth: &GroundTruth, sigma: f64) -> Result<CentralityComparison> {
    let initiators: BTreeSet<usize> = truth
        .segments()
        .iter()
        .flat_map(|s| s.factions.iter().map(|f| f.leader))
        .collect();
    let k = initiators.len();
    let net = create_following_network(&u.displacements(), sigma, default_shift(u.len()))?;
    let pr = pagerank(&net, DEFAULT_DAMPING)?;
    let indeg: Vec<f64> = (0..net.n())
        .map(|v| net.in_neighbors(v).map(|k| net.weight(k, v)).sum())
        .collect();
    let close = closeness(&net);
    let (pagerank_top, in_degree_top, closeness_top) = (top_k(&pr, k), top_k(&indeg, k), top_k(&close, k));
    Ok(CentralityComparison {
        pagerank: jaccard(&pagerank_top, &initiators),
        in_degree: jaccard(&in_degree_top, &initiators),
        closeness: jaccard(&closeness_top, &initiators),
        initiators,
        pagerank_top,
        in_degree_top,
        closeness_top,
    })
}

/// For each true initiator, the share of comparisons whose top set per
/// measure contains it, as `(pagerank, in_degree, closeness)`.
pub fn initiator_support(runs: &[CentralityComparison]) -> BTreeMap<usize, (f64, f64, f64)> {
    let mut out = BTreeMap::new();
    let all: BTreeSet<usize> = runs.iter().flat_map(|r| r.initiators.iter().copied()).collect();
    for v in all {
        let share = |f: fn(&CentralityComparison) -> &BTreeSet<usize>| {
            runs.iter().filter(|r| f(r).contains(&v)).count() as f64 / runs.len() as f64
        };
        out.insert(
            v,
            (share(|r| &r.pagerank_top), share(|r| &r.in_degree_top), share(|r| &r.closeness_top)),
        );
    }
    out
}
