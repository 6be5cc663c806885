//! Shared inputs for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leadership_core::sim::{simulate, EventType, Model, SimConfig};
use leadership_core::{Dataset, TimeSeries};

/// Deterministic planar random walk of `len` points.
pub fn walk(id: &str, len: usize, seed: u64) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = || rng.random_range(-0.5..0.5);
    let (mut x, mut y) = (0.0, 0.0);
    let mut values = Vec::with_capacity(2 * len);
    for _ in 0..len {
        x += next();
        y += next();
        values.extend([x, y]);
    }
    TimeSeries::new(id, 2, values).expect("valid walk")
}

/// A short single-event DM simulation with `n` individuals.
pub fn small_dataset(n: usize, t_star: usize) -> Dataset {
    let mut cfg = SimConfig::new(Model::Dm, EventType::Linear, 7);
    cfg.n = n;
    cfg.t_star = t_star;
    cfg.events = t_star.div_ceil(800);
    simulate(&cfg).expect("valid config").0
}
