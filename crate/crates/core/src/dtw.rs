//! Sakoe-Chiba constrained dynamic time warping and the signed following
//! score of a warping path.
//!
//! The score of a path is the mean of `sign(j - i)` over its cells. A
//! positive score means the second series reproduces the first one's
//! pattern later in time, i.e. the second series follows the first.

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Optimal banded warping path between two series. Indices are 0-based:
/// `(i, j)` aligns `u[i]` with `w[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingResult {
    pub path: Vec<(usize, usize)>,
    pub cost: f64,
    pub score: f64,
}

impl WarpingResult {
    /// Median of `j - i` along the path (lower median for even lengths).
    pub fn median_lag(&self) -> i64 {
        let mut lags: Vec<i64> = self.path.iter().map(|&(i, j)| j as i64 - i as i64).collect();
        lags.sort_unstable();
        lags[(lags.len() - 1) / 2]
    }
}

/// Magnitude and lag of the following relation between two series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxSimilarity {
    pub similarity: f64,
    pub delta_t: i64,
}

/// Cost and score of an alignment without materialising the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentSummary {
    pub cost: f64,
    pub score: f64,
}

/// Mean of `sign(j - i)` over the path.
pub fn following_score(path: &[(usize, usize)]) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    let total: i64 = path.iter().map(|&(i, j)| sign(i, j)).sum();
    Ok(total as f64 / path.len() as f64)
}

/// Minimum-cost monotone warping path with `|i - j| <= band` under the
/// Euclidean point distance.
///
/// Among equal-cost predecessors the diagonal step wins, then the step that
/// advances only `w`, then the step that advances only `u`.
pub fn dtw_align(u: &TimeSeries, w: &TimeSeries, band: usize) -> Result<WarpingResult> {
    check_pair(u, w)?;
    let mut aligner = Aligner::default();
    let mut path = Vec::with_capacity(u.len() + w.len());
    let cost = aligner.fill(u.as_flat(), w.as_flat(), u.dim(), band)?;
    aligner.backtrack(|i, j| path.push((i, j)));
    path.reverse();
    let score = following_score(&path)?;
    Ok(WarpingResult { path, cost, score })
}

/// `|s|` of the optimal path together with its median lag.
pub fn sim_max(u: &TimeSeries, w: &TimeSeries, band: usize) -> Result<MaxSimilarity> {
    let r = dtw_align(u, w, band)?;
    Ok(MaxSimilarity {
        similarity: r.score.abs(),
        delta_t: r.median_lag(),
    })
}

fn check_pair(u: &TimeSeries, w: &TimeSeries) -> Result<()> {
    if u.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: w.dim(),
        });
    }
    Ok(())
}

#[inline]
fn sign(i: usize, j: usize) -> i64 {
    (j as i64 - i as i64).signum()
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Reusable banded cost matrix. Row `i` stores columns `i - band ..= i + band`.
#[derive(Debug, Default)]
pub struct Aligner {
    cost: Vec<f64>,
    rows: usize,
    cols: usize,
    band: usize,
}

impl Aligner {
    /// Score and cost of the optimal path between two flat point buffers.
    pub fn summarize(&mut self, u: &[f64], w: &[f64], dim: usize, band: usize) -> Result<AlignmentSummary> {
        let cost = self.fill(u, w, dim, band)?;
        let (mut total, mut len) = (0i64, 0usize);
        self.backtrack(|i, j| {
            total += sign(i, j);
            len += 1;
        });
        Ok(AlignmentSummary {
            cost,
            score: total as f64 / len as f64,
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        // Callers guarantee |i - j| <= band.
        self.cost[i * (2 * self.band + 1) + (j + self.band - i)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.band < i || j > i + self.band || j >= self.cols {
            f64::INFINITY
        } else {
            self.at(i, j)
        }
    }

    fn fill(&mut self, u: &[f64], w: &[f64], dim: usize, band: usize) -> Result<f64> {
        if u.is_empty() || w.is_empty() {
            return Err(Error::EmptySeries);
        }
        let (rows, cols) = (u.len() / dim, w.len() / dim);
        if rows.abs_diff(cols) > band {
            return Err(Error::InfeasibleBand {
                band,
                left: rows,
                right: cols,
            });
        }
        // A band wider than both series is equivalent to the unconstrained case.
        let band = band.min(rows.max(cols));
        let stride = 2 * band + 1;
        self.rows = rows;
        self.cols = cols;
        self.band = band;
        self.cost.clear();
        self.cost.resize(rows * stride, f64::INFINITY);

        for i in 0..rows {
            let ui = &u[i * dim..(i + 1) * dim];
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(cols - 1);
            for j in lo..=hi {
                let d = euclidean(ui, &w[j * dim..(j + 1) * dim]);
                let best = if i == 0 && j == 0 {
                    0.0
                } else {
                    let mut best = f64::INFINITY;
                    if i > 0 && j > 0 {
                        best = self.at(i - 1, j - 1);
                    }
                    if j > lo {
                        best = best.min(self.at(i, j - 1));
                    }
                    if i > 0 && j < i + band {
                        best = best.min(self.at(i - 1, j));
                    }
                    best
                };
                self.cost[i * stride + (j + band - i)] = best + d;
            }
        }
        Ok(self.at(rows - 1, cols - 1))
    }

    /// Visits path cells from the end back to `(0, 0)`.
    fn backtrack(&self, mut visit: impl FnMut(usize, usize)) {
        let (mut i, mut j) = (self.rows - 1, self.cols - 1);
        visit(i, j);
        while i > 0 || j > 0 {
            if i == 0 {
                j -= 1;
            } else if j == 0 {
                i -= 1;
            } else {
                let diag = self.get(i - 1, j - 1);
                let left = self.get(i, j - 1);
                let up = self.get(i - 1, j);
                if diag <= left && diag <= up {
                    i -= 1;
                    j -= 1;
                } else if left <= up {
                    j -= 1;
                } else {
                    i -= 1;
                }
            }
            visit(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive minimum over every banded monotone path, summing point
    /// distances from the start of the path.
    fn brute_force_cost(u: &[f64], w: &[f64], band: usize) -> f64 {
        fn walk(u: &[f64], w: &[f64], band: usize, i: usize, j: usize, acc: f64, best: &mut f64) {
            let acc = acc + (u[i] - w[j]).abs();
            if i + 1 == u.len() && j + 1 == w.len() {
                *best = best.min(acc);
                return;
            }
            for (di, dj) in [(1, 1), (0, 1), (1, 0)] {
                let (ni, nj) = (i + di, j + dj);
                if ni < u.len() && nj < w.len() && ni.abs_diff(nj) <= band {
                    walk(u, w, band, ni, nj, acc, best);
                }
            }
        }
        let mut best = f64::INFINITY;
        walk(u, w, band, 0, 0, 0.0, &mut best);
        best
    }

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries::scalar("s", values).unwrap()
    }

    fn is_valid_path(p: &[(usize, usize)], n: usize, m: usize, band: usize) -> bool {
        p.first() == Some(&(0, 0))
            && p.last() == Some(&(n - 1, m - 1))
            && p.iter().all(|&(i, j)| i.abs_diff(j) <= band)
            && p.windows(2).all(|s| {
                let (di, dj) = (s[1].0 - s[0].0, s[1].1 - s[0].1);
                matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
            })
    }

    #[test]
    fn identical_series_align_diagonally() {
        let u = series(&[0.0, 3.0, 1.0, 1.0, 4.0]);
        for band in 0..4 {
            let r = dtw_align(&u, &u, band).unwrap();
            assert_eq!(r.path, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
            assert_eq!(r.cost, 0.0);
            assert_eq!(r.score, 0.0);
        }
    }

    #[test]
    fn lagged_ramp_scores_positive() {
        let u = series(&[0.0, 1.0, 2.0]);
        let w = series(&[0.0, 0.0, 1.0, 2.0]);
        let r = dtw_align(&u, &w, 2).unwrap();
        assert_eq!(r.cost, brute_force_cost(&[0.0, 1.0, 2.0], &[0.0, 0.0, 1.0, 2.0], 2));
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.path, vec![(0, 0), (0, 1), (1, 2), (2, 3)]);
        assert!(r.score > 0.0);
        assert_eq!(r.score, 0.75);
    }

    #[test]
    fn score_examples() {
        assert_eq!(following_score(&[(1, 1), (2, 2), (3, 3)]).unwrap(), 0.0);
        assert_eq!(following_score(&[(1, 2), (2, 3), (3, 4)]).unwrap(), 1.0);
        assert_eq!(following_score(&[(1, 2), (2, 2), (3, 2), (3, 3)]).unwrap(), 0.0);
        assert!(matches!(following_score(&[]), Err(Error::EmptyPath)));
    }

    #[test]
    fn delayed_ramp_lag_is_recovered() {
        let ramp: Vec<f64> = (0..20).map(f64::from).collect();
        let delayed: Vec<f64> = (0..20).map(|t| f64::from((t - 3).max(0))).collect();
        let m = sim_max(&series(&ramp), &series(&delayed), 5).unwrap();
        assert_eq!(m.delta_t, 3);
        assert!(m.similarity > 0.5);
        let back = sim_max(&series(&delayed), &series(&ramp), 5).unwrap();
        assert_eq!(back.similarity, m.similarity);
        assert_eq!(back.delta_t, -3);
    }

    #[test]
    fn identical_series_have_no_similarity() {
        let u = series(&[1.0, 2.0, 0.0, 5.0]);
        assert_eq!(
            sim_max(&u, &u, 2).unwrap(),
            MaxSimilarity {
                similarity: 0.0,
                delta_t: 0
            }
        );
    }

    #[test]
    fn infeasible_band_and_empty_input() {
        let u = series(&[0.0, 1.0, 2.0, 3.0]);
        let w = series(&[0.0, 1.0]);
        assert!(matches!(dtw_align(&u, &w, 1), Err(Error::InfeasibleBand { .. })));
        assert!(dtw_align(&u, &w, 2).is_ok());
        let mut a = Aligner::default();
        assert!(matches!(a.summarize(&[], &[1.0], 1, 3), Err(Error::EmptySeries)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let u = TimeSeries::new("u", 2, vec![0.0; 6]).unwrap();
        let w = TimeSeries::new("w", 3, vec![0.0; 6]).unwrap();
        assert!(matches!(dtw_align(&u, &w, 3), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multidimensional_distance_is_euclidean() {
        let u = TimeSeries::new("u", 2, vec![0.0, 0.0]).unwrap();
        let w = TimeSeries::new("w", 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(dtw_align(&u, &w, 0).unwrap().cost, 5.0);
    }

    #[test]
    fn summary_matches_full_alignment() {
        let u = [0.3, 1.2, -0.4, 2.2, 0.9, 0.0, 1.5];
        let w = [0.1, 0.3, 1.0, -0.2, 2.0, 1.1, 0.2];
        let full = dtw_align(&series(&u), &series(&w), 3).unwrap();
        let s = Aligner::default().summarize(&u, &w, 1, 3).unwrap();
        assert_eq!(s.cost, full.cost);
        assert_eq!(s.score, full.score);
    }

    proptest! {
        #[test]
        fn cost_matches_exhaustive_minimum(
            u in prop::collection::vec(0u8..4, 1..=6),
            w in prop::collection::vec(0u8..4, 1..=6),
            extra in 0usize..4,
        ) {
            let u: Vec<f64> = u.into_iter().map(f64::from).collect();
            let w: Vec<f64> = w.into_iter().map(f64::from).collect();
            let band = u.len().abs_diff(w.len()) + extra;
            let r = dtw_align(&series(&u), &series(&w), band).unwrap();
            prop_assert_eq!(r.cost, brute_force_cost(&u, &w, band));
            prop_assert!(is_valid_path(&r.path, u.len(), w.len(), band));
            prop_assert_eq!(r.score, following_score(&r.path).unwrap());
            prop_assert!((-1.0..=1.0).contains(&r.score));
        }

        #[test]
        fn reversed_arguments_negate_score(
            u in prop::collection::vec(-10.0f64..10.0, 2..30),
            w in prop::collection::vec(-10.0f64..10.0, 2..30),
            extra in 0usize..6,
        ) {
            let band = u.len().abs_diff(w.len()) + extra;
            let a = dtw_align(&series(&u), &series(&w), band).unwrap();
            let b = dtw_align(&series(&w), &series(&u), band).unwrap();
            prop_assert_eq!(a.cost, b.cost);
            let transposed: Vec<_> = a.path.iter().map(|&(i, j)| (j, i)).collect();
            prop_assert_eq!(following_score(&transposed).unwrap(), -a.score);
            prop_assert_eq!(b.score, -a.score);
        }

        #[test]
        fn wider_band_never_costs_more(
            u in prop::collection::vec(-5.0f64..5.0, 2..25),
            w in prop::collection::vec(-5.0f64..5.0, 2..25),
        ) {
            let base = u.len().abs_diff(w.len());
            let mut last = f64::INFINITY;
            for band in base..base + 6 {
                let c = dtw_align(&series(&u), &series(&w), band).unwrap().cost;
                prop_assert!(c >= 0.0);
                prop_assert!(c <= last);
                last = c;
            }
        }
    }
}
