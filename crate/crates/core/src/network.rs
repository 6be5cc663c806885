//! Static following networks for one window and dynamic networks stacked
//! over sliding windows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::Aligner;
use crate::error::{Error, Result};
use crate::series::{default_shift, sliding_windows, Dataset, Window};

/// Default threshold on `|s|` for accepting a following relation.
pub const DEFAULT_SIGMA: f64 = 0.5;

/// Weighted directed graph; an edge `from -> to` means `from` follows `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowingNetwork {
    n: usize,
    weights: Vec<f64>,
    sigma: f64,
}

impl FollowingNetwork {
    pub fn empty(n: usize, sigma: f64) -> Self {
        Self {
            n,
            weights: vec![0.0; n * n],
            sigma,
        }
    }

    /// Builds a network from explicit `(follower, followed, weight)` edges.
    pub fn from_edges(n: usize, sigma: f64, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut net = Self::empty(n, sigma);
        for &(from, to, w) in edges {
            if from >= n || to >= n || from == to {
                return Err(Error::InvalidParameter(format!("bad edge {from} -> {to}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!("bad weight {w} on {from} -> {to}")));
            }
            net.weights[from * n + to] = w;
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Weight of `from -> to`; zero when there is no edge.
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[from * self.n + to]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.weight(from, to) > 0.0
    }

    pub(crate) fn set_weight(&mut self, from: usize, to: usize, w: f64) {
        self.weights[from * self.n + to] = w;
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(k, &w)| (k / self.n, k % self.n, w))
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn out_neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.has_edge(node, j))
    }

    pub fn in_neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&k| self.has_edge(k, node))
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_neighbors(node).count()
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_neighbors(node).count()
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n, self.sigma);
        for (from, to, w) in self.edges() {
            out.set_weight(perm[from], perm[to], w);
        }
        out
    }
}

/// Signed following scores for every pair of a window; `score(i, j) > 0`
/// means `j` follows `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    /// Builds an antisymmetric matrix from the upper triangle `s(i, j)`, `i < j`.
    pub fn from_upper(n: usize, upper: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut m = Self::zeros(n);
        for (i, j, s) in upper {
            m.values[i * n + j] = s;
            m.values[j * n + i] = -s;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn score(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// `|s|` for the pair, the maximal similarity used by the coordination measure.
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        self.score(i, j).abs()
    }
}

/// How series are transformed before alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocess {
    /// Align per-step displacement vectors.
    #[default]
    Displacement,
    /// Align raw coordinates.
    Raw,
}

/// Parameters shared by network construction and the inference pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions {
    pub sigma: f64,
    /// Sakoe-Chiba band; `None` uses the window shift.
    pub band: Option<usize>,
    /// Window shift; `None` uses [`default_shift`].
    pub delta: Option<usize>,
    pub preprocess: Preprocess,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            band: None,
            delta: None,
            preprocess: Preprocess::Displacement,
        }
    }
}

impl NetworkOptions {
    pub fn shift_for(&self, omega: usize) -> usize {
        self.delta.unwrap_or_else(|| default_shift(omega))
    }

    pub fn band_for(&self, omega: usize) -> usize {
        self.band.unwrap_or_else(|| self.shift_for(omega))
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma {} must lie in (0, 1]",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Signed scores of every pair `i < j`, in ascending pair order.
pub fn score_pairs(q: &Dataset, band: usize) -> Result<ScoreMatrix> {
    let n = q.n();
    if n < 2 {
        return Err(Error::TooFewSeries(n));
    }
    let mut aligner = Aligner::default();
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let s = aligner.summarize(q.get(i).as_flat(), q.get(j).as_flat(), q.dim(), band)?;
            upper.push((i, j, s.score));
        }
    }
    Ok(ScoreMatrix::from_upper(n, upper))
}

/// Thresholds signed scores into a following network.
pub fn network_from_scores(scores: &ScoreMatrix, sigma: f64) -> FollowingNetwork {
    let n = scores.n();
    let mut net = FollowingNetwork::empty(n, sigma);
    for i in 0..n {
        for j in i + 1..n {
            let s = scores.score(i, j);
            if s >= sigma {
                net.set_weight(j, i, s.abs());
            } else if s <= -sigma {
                net.set_weight(i, j, s.abs());
            }
        }
    }
    net
}

/// Aligns every pair of `q` and keeps relations with `|s| >= sigma`.
pub fn create_following_network(q: &Dataset, sigma: f64, band: usize) -> Result<FollowingNetwork> {
    NetworkOptions {
        sigma,
        ..Default::default()
    }
    .validate()?;
    Ok(network_from_scores(&score_pairs(q, band)?, sigma))
}

/// One block of consecutive time steps sharing a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkBlock {
    /// 0-based half-open offsets of the steps this block covers.
    pub start: usize,
    pub end: usize,
    /// The window the network was computed from.
    pub window: Window,
    pub network: FollowingNetwork,
    pub scores: ScoreMatrix,
}

impl NetworkBlock {
    /// 1-based time steps covered by the block.
    pub fn steps(&self) -> std::ops::RangeInclusive<usize> {
        self.start + 1..=self.end
    }
}

/// Block-constant sequence of following networks covering `[1, t*]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicNetwork {
    len: usize,
    omega: usize,
    delta: usize,
    blocks: Vec<NetworkBlock>,
}

impl DynamicNetwork {
    /// Assembles blocks that tile `[0, len)` in order.
    pub fn from_blocks(len: usize, omega: usize, delta: usize, blocks: Vec<NetworkBlock>) -> Result<Self> {
        let mut expect = 0;
        for b in &blocks {
            if b.start != expect || b.end <= b.start {
                return Err(Error::InvalidParameter(format!(
                    "blocks must tile the series; found [{}, {}) after {expect}",
                    b.start, b.end
                )));
            }
            expect = b.end;
        }
        if expect != len {
            return Err(Error::InvalidParameter(format!(
                "blocks cover {expect} of {len} steps"
            )));
        }
        Ok(Self {
            len,
            omega,
            delta,
            blocks,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.blocks[0].network.n()
    }

    pub fn blocks(&self) -> &[NetworkBlock] {
        &self.blocks
    }

    /// Block covering the 1-based time step `t`.
    pub fn block_at(&self, t: usize) -> &NetworkBlock {
        assert!(t >= 1 && t <= self.len, "time step {t} outside [1, {}]", self.len);
        let k = self.blocks.partition_point(|b| b.end < t);
        &self.blocks[k]
    }

    /// Network at the 1-based time step `t`.
    pub fn at(&self, t: usize) -> &FollowingNetwork {
        &self.block_at(t).network
    }

    pub fn to_export(&self, ids: &[String]) -> NetworkExport {
        NetworkExport {
            omega: self.omega,
            delta: self.delta,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockExport {
                    t_start: b.start + 1,
                    t_end: b.end,
                    edges: b
                        .network
                        .edges()
                        .map(|(from, to, weight)| EdgeExport {
                            from: ids[from].clone(),
                            to: ids[to].clone(),
                            weight,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// JSON form of a dynamic network; `t_start..=t_end` are 1-based steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkExport {
    pub omega: usize,
    pub delta: usize,
    pub blocks: Vec<BlockExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockExport {
    pub t_start: usize,
    pub t_end: usize,
    pub edges: Vec<EdgeExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// Sliding-window construction: window `i` fills the block
/// `[(i-1)delta, i*delta)` and the tail window fills `[K*delta, t*)`.
pub fn create_dynamic_network(u: &Dataset, omega: usize, opts: &NetworkOptions) -> Result<DynamicNetwork> {
    opts.validate()?;
    let t_star = u.len();
    let delta = opts.shift_for(omega);
    let band = opts.band_for(omega);
    let windows = sliding_windows(t_star, omega, delta)?;
    if u.n() < 2 {
        return Err(Error::TooFewSeries(u.n()));
    }
    let source = match opts.preprocess {
        Preprocess::Displacement => u.displacements(),
        Preprocess::Raw => u.clone(),
    };
    let last = windows.len() - 1;
    let blocks = windows
        .par_iter()
        .enumerate()
        .map(|(k, w)| {
            let scores = score_pairs(&source.slice(w)?, band)?;
            let network = network_from_scores(&scores, opts.sigma);
            let (start, end) = if k == last {
                (w.start, t_star)
            } else {
                (w.start, w.start + delta)
            };
            Ok(NetworkBlock {
                start,
                end,
                window: *w,
                network,
                scores,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DynamicNetwork::from_blocks(t_star, omega, delta, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::dtw_align;
    use crate::series::TimeSeries;
    use proptest::prelude::*;

    fn scalar_dataset(rows: &[Vec<f64>]) -> Dataset {
        Dataset::new(
            rows.iter()
                .enumerate()
                .map(|(k, v)| TimeSeries::scalar((k + 1).to_string(), v).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn ramp_with_lag(len: usize, lag: usize) -> Vec<f64> {
        (0..len).map(|t| t.saturating_sub(lag) as f64).collect()
    }

    #[test]
    fn identical_constant_series_have_no_edges() {
        let q = scalar_dataset(&[vec![2.0; 10], vec![2.0; 10]]);
        assert_eq!(create_following_network(&q, 0.5, 3).unwrap().edge_count(), 0);
    }

    #[test]
    fn delayed_copy_follows_original() {
        let q = scalar_dataset(&[ramp_with_lag(20, 0), ramp_with_lag(20, 3)]);
        let s = dtw_align(q.get(0), q.get(1), 5).unwrap().score;
        assert!(s >= 0.5);
        let net = create_following_network(&q, 0.5, 5).unwrap();
        assert_eq!(net.edges().collect::<Vec<_>>(), vec![(1, 0, s)]);
    }

    #[test]
    fn too_few_series_rejected() {
        let q = scalar_dataset(&[vec![1.0, 2.0]]);
        assert!(matches!(create_following_network(&q, 0.5, 1), Err(Error::TooFewSeries(1))));
    }

    #[test]
    fn invalid_sigma_rejected() {
        let q = scalar_dataset(&[vec![1.0, 2.0], vec![1.0, 2.0]]);
        assert!(create_following_network(&q, 0.0, 1).is_err());
        assert!(create_following_network(&q, 1.5, 1).is_err());
    }

    #[test]
    fn single_window_dynamic_network() {
        let q = scalar_dataset(&[ramp_with_lag(30, 0), ramp_with_lag(30, 2), ramp_with_lag(30, 4)]);
        let opts = NetworkOptions {
            delta: Some(3),
            preprocess: Preprocess::Raw,
            ..Default::default()
        };
        let dy = create_dynamic_network(&q, 30, &opts).unwrap();
        assert_eq!(dy.blocks().len(), 1);
        let whole = create_following_network(&q, 0.5, 3).unwrap();
        for t in 1..=30 {
            assert_eq!(dy.at(t), &whole);
        }
    }

    #[test]
    fn block_layout_follows_windows() {
        let rows: Vec<Vec<f64>> = (0..3).map(|k| ramp_with_lag(100, k)).collect();
        let q = scalar_dataset(&rows);
        let opts = NetworkOptions {
            delta: Some(2),
            ..Default::default()
        };
        let dy = create_dynamic_network(&q, 20, &opts).unwrap();
        assert_eq!(dy.blocks().len(), 41);
        for (k, b) in dy.blocks().iter().enumerate().take(40) {
            assert_eq!((b.start, b.end), (2 * k, 2 * k + 2));
            assert_eq!((b.window.start, b.window.end), (2 * k, 2 * k + 20));
        }
        let tail = dy.blocks().last().unwrap();
        assert_eq!((tail.start, tail.end), (80, 100));
        assert_eq!(dy.block_at(1).start, 0);
        assert_eq!(dy.block_at(2).start, 0);
        assert_eq!(dy.block_at(3).start, 2);
        assert_eq!(dy.block_at(100).start, 80);
    }

    #[test]
    fn export_uses_one_based_inclusive_steps() {
        let q = scalar_dataset(&[ramp_with_lag(20, 0), ramp_with_lag(20, 3)]);
        let opts = NetworkOptions {
            delta: Some(5),
            preprocess: Preprocess::Raw,
            ..Default::default()
        };
        let dy = create_dynamic_network(&q, 20, &opts).unwrap();
        let ex = dy.to_export(&q.ids());
        assert_eq!((ex.blocks[0].t_start, ex.blocks[0].t_end), (1, 20));
        assert_eq!(ex.blocks[0].edges[0].from, "2");
        assert_eq!(ex.blocks[0].edges[0].to, "1");
        let text = serde_json::to_string(&ex).unwrap();
        let back: NetworkExport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, ex);
    }

    #[test]
    fn leader_change_changes_edges() {
        // Series 1 leads until step 50, series 2 afterwards.
        let pattern = |t: usize| ((t as f64) * 0.7).sin() + ((t as f64) * 0.23).cos();
        let len = 100;
        let lag = 3;
        let mut a = vec![0.0; len];
        let mut b = vec![0.0; len];
        for t in 0..len {
            if t < 50 {
                a[t] = pattern(t);
                b[t] = pattern(t.saturating_sub(lag));
            } else {
                b[t] = pattern(t);
                a[t] = pattern(t - lag);
            }
        }
        let q = scalar_dataset(&[a, b]);
        let opts = NetworkOptions {
            delta: Some(5),
            preprocess: Preprocess::Raw,
            ..Default::default()
        };
        let dy = create_dynamic_network(&q, 20, &opts).unwrap();
        // Per-window oracle: networks built directly from each slice.
        for b in dy.blocks() {
            let direct = create_following_network(&q.slice(&b.window).unwrap(), 0.5, 5).unwrap();
            assert_eq!(b.network, direct);
        }
        assert!(dy.at(10).has_edge(1, 0));
        assert!(dy.at(70).has_edge(0, 1));
    }

    proptest! {
        #[test]
        fn networks_satisfy_invariants(
            rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 12), 2..7),
            sigma in 0.05f64..1.0,
        ) {
            let q = scalar_dataset(&rows);
            let net = create_following_network(&q, sigma, 3).unwrap();
            for i in 0..q.n() {
                prop_assert_eq!(net.weight(i, i), 0.0);
                for j in 0..q.n() {
                    prop_assert!(!(net.has_edge(i, j) && net.has_edge(j, i)));
                    let w = net.weight(i, j);
                    prop_assert!(w == 0.0 || (w >= sigma && w <= 1.0));
                }
            }
        }

        #[test]
        fn construction_commutes_with_relabeling(
            rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 10), 3..6),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let n = rows.len();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let mut shuffled = vec![Vec::new(); n];
            for (old, row) in rows.iter().enumerate() {
                shuffled[perm[old]] = row.clone();
            }
            let a = create_following_network(&scalar_dataset(&rows), 0.5, 2).unwrap();
            let b = create_following_network(&scalar_dataset(&shuffled), 0.5, 2).unwrap();
            prop_assert_eq!(a.permuted(&perm), b);
        }
    }
}
