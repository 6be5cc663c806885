//! Unnormalised weighted PageRank on a following network.
//!
//! `pi_i = d * sum_{k -> i} w(k, i) * pi_k / outdeg(k) + (1 - d)`, where the
//! out-degree counts edges rather than summing weights. Scores do not sum
//! to one.

use crate::error::{Error, Result};
use crate::network::FollowingNetwork;

pub const DEFAULT_DAMPING: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankOptions {
    pub damping: f64,
    /// Stop once no score moves by more than this between sweeps.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        Self {
            damping: DEFAULT_DAMPING,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

pub fn pagerank(net: &FollowingNetwork, damping: f64) -> Result<Vec<f64>> {
    pagerank_with(
        net,
        &PageRankOptions {
            damping,
            ..Default::default()
        },
    )
}

/// Jacobi iteration from the all-ones vector.
pub fn pagerank_with(net: &FollowingNetwork, opts: &PageRankOptions) -> Result<Vec<f64>> {
    let d = opts.damping;
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidParameter(format!("damping {d} must lie in (0, 1)")));
    }
    let n = net.n();
    let out: Vec<f64> = (0..n).map(|k| net.out_degree(k) as f64).collect();
    // incoming[i] holds (k, w(k, i) / outdeg(k)).
    let incoming: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            net.in_neighbors(i)
                .map(|k| (k, net.weight(k, i) / out[k]))
                .collect()
        })
        .collect();

    let mut pi = vec![1.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        residual = 0.0;
        for (i, inc) in incoming.iter().enumerate() {
            let flow: f64 = inc.iter().map(|&(k, c)| c * pi[k]).sum();
            next[i] = d * flow + (1.0 - d);
            residual = f64::max(residual, (next[i] - pi[i]).abs());
        }
        std::mem::swap(&mut pi, &mut next);
        if residual < opts.tolerance {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual,
    })
}
