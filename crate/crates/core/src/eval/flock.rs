//! Geometric following baseline.
//!
//! At each step A follows B when their headings agree to within `beta`, B is
//! ahead of A along B's heading, and the two are closer than `gamma`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::leadership_f1;
use crate::coordination::median;
use crate::error::{Error, Result};
use crate::factions::{snapshot_factions, FactionTimeline, DEFAULT_DAMPING};
use crate::network::FollowingNetwork;
use crate::series::Dataset;
use crate::sim::GroundTruth;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlockParams {
    /// Largest heading difference, radians.
    pub beta: f64,
    /// Largest distance, in coordinate units.
    pub gamma: f64,
}

impl FlockParams {
    /// `beta = pi / 6` and `gamma` five median step lengths.
    pub fn default_for(u: &Dataset) -> Self {
        Self {
            beta: PI / 6.0,
            gamma: 5.0 * median_step_length(u),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= PI) {
            return Err(Error::InvalidParameter(format!("beta {} must lie in (0, pi]", self.beta)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma {} must be positive", self.gamma)));
        }
        Ok(())
    }
}

fn step_vec(u: &Dataset, i: usize, t: usize) -> (&[f64], Vec<f64>) {
    let s = u.get(i);
    let (now, before) = (s.point(t - 1), s.point(t - 2));
    (now, now.iter().zip(before).map(|(a, b)| a - b).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Median length of all nonzero per-step moves.
pub fn median_step_length(u: &Dataset) -> f64 {
    let mut lengths = Vec::new();
    for i in 0..u.n() {
        for t in 2..=u.len() {
            let l = dot(&step_vec(u, i, t).1, &step_vec(u, i, t).1).sqrt();
            if l > 0.0 {
                lengths.push(l);
            }
        }
    }
    if lengths.is_empty() {
        1.0
    } else {
        median(&lengths)
    }
}

/// Unit-weight network at the 1-based step `t >= 2`.
///
/// Headings that differ can make both A and B look ahead of each other; the
/// pair then keeps only the direction with the larger lead.
pub fn flock_network(u: &Dataset, t: usize, params: &FlockParams) -> Result<FollowingNetwork> {
    params.validate()?;
    if t < 2 || t > u.len() {
        return Err(Error::InvalidParameter(format!("step {t} outside [2, {}]", u.len())));
    }
    let n = u.n();
    let moves: Vec<(&[f64], Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let (p, d) = step_vec(u, i, t);
            let l = dot(&d, &d).sqrt();
            (p, d, l)
        })
        .collect();
    let cos_beta = params.beta.cos();
    // Lead of b over a along b's heading, when every predicate holds.
    let lead = |a: usize, b: usize| -> Option<f64> {
        let (pa, da, la) = &moves[a];
        let (pb, db, lb) = &moves[b];
        if *la == 0.0 || *lb == 0.0 {
            return None;
        }
        let gap: Vec<f64> = pb.iter().zip(pa.iter()).map(|(x, y)| x - y).collect();
        let dist = dot(&gap, &gap).sqrt();
        let ahead = dot(&gap, db) / lb;
        let aligned = dot(da, db) / (la * lb) > cos_beta || params.beta >= PI;
        (aligned && ahead > 0.0 && dist < params.gamma).then_some(ahead)
    };
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            match (lead(a, b), lead(b, a)) {
                (Some(x), Some(y)) if y > x => edges.push((b, a, 1.0)),
                (Some(_), _) => edges.push((a, b, 1.0)),
                (None, Some(_)) => edges.push((b, a, 1.0)),
                (None, None) => {}
            }
        }
    }
    FollowingNetwork::from_edges(n, 0.0, &edges)
}

/// FLOCK networks at every step fed through the faction pipeline. Step 1
/// has no headings and gets an empty network.
pub fn flock_timeline(u: &Dataset, params: &FlockParams) -> Result<FactionTimeline> {
    let n = u.n();
    let mut steps = Vec::with_capacity(u.len());
    steps.push(snapshot_factions(&FollowingNetwork::empty(n, 0.0), 1, DEFAULT_DAMPING)?);
    for t in 2..=u.len() {
        steps.push(snapshot_factions(&flock_network(u, t, params)?, t, DEFAULT_DAMPING)?);
    }
    FactionTimeline::from_steps(n, steps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub params: FlockParams,
    pub f1: f64,
}

/// Tries every `beta` and `gamma = factor * median step` pair and returns
/// all results with the best first; ties keep grid order.
pub fn flock_grid(u: &Dataset, truth: &GroundTruth, betas: &[f64], gamma_factors: &[f64]) -> Result<Vec<GridResult>> {
    let step = median_step_length(u);
    let mut out = Vec::new();
    for &beta in betas {
        for &g in gamma_factors {
            let params = FlockParams { beta, gamma: g * step };
            let f1 = leadership_f1(&flock_timeline(u, &params)?, truth)?;
            out.push(GridResult { params, f1 });
        }
    }
    out.sort_by(|a, b| b.f1.total_cmp(&a.f1));
    Ok(out)
}
