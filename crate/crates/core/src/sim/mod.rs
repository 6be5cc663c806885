//! Labelled trajectory generators for four leadership mechanisms.
//!
//! Every model walks 2-D individuals through a scripted sequence of
//! segments. A segment's leader heads for a distant random target with a
//! slowly wandering heading; what the other members do depends on the model.
//!
//! * Dictatorship: every member copies the leader's displacement after its
//!   own lag.
//! * Hierarchy: members form a chain below the leader and each copies the
//!   one above it.
//! * Independent cascade: active members copy the leader; inactive ones only
//!   jitter until a nearby active individual activates them.
//! * Crowd: a few informed members know the target, the rest steer toward
//!   the faction centroid and its recent mean heading.

mod script;
mod truth;

use std::f64::consts::TAU;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use script::{event_script, full_script, EventType, ScriptFaction, ScriptSegment, SegmentKind, EVENT_LENGTH};
pub use truth::{GroundTruth, SegmentExport, TruthExport, TruthFaction, TruthFactionExport, TruthSegment, TruthStepExport};

use crate::error::{Error, Result};
use crate::series::{Dataset, TimeSeries};

/// Persistence of the leader's heading wander. Slow drift keeps copies that
/// lag far behind still correlated with the leader.
const WANDER_MEMORY: f64 = 0.995;
/// Standard deviation, in radians, of each wander innovation.
const WANDER_STD: f64 = 0.05;
/// Distance to each segment's target, in units of `speed`.
const TARGET_DISTANCE: f64 = 1000.0;
const START_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Dm,
    Hm,
    Ic,
    Cm,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dm" => Ok(Model::Dm),
            "hm" => Ok(Model::Hm),
            "ic" => Ok(Model::Ic),
            "cm" => Ok(Model::Cm),
            _ => Err(Error::InvalidParameter(format!("unknown model {s}"))),
        }
    }
}

impl std::str::FromStr for EventType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" | "l" => Ok(EventType::Linear),
            "merge_split" | "ms" => Ok(EventType::MergeSplit),
            _ => Err(Error::InvalidParameter(format!("unknown event type {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    /// Nearest inactive individuals each newly active one tries.
    pub k: usize,
    /// Activation probability, also the initial activation rate.
    pub rho: f64,
}

impl Default for CascadeParams {
    fn default() -> Self {
        Self { k: 5, rho: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: Model,
    pub event_type: EventType,
    pub n: usize,
    pub t_star: usize,
    pub events: usize,
    /// Required for, and only for, the cascade model.
    pub ic: Option<CascadeParams>,
    pub cm_informed: usize,
    pub speed: f64,
    /// Per-coordinate step noise; `None` means `0.05 * speed`.
    pub noise_std: Option<f64>,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: Model, event_type: EventType, seed: u64) -> Self {
        Self {
            model,
            event_type,
            n: 30,
            t_star: 4000,
            events: 5,
            ic: (model == Model::Ic).then(CascadeParams::default),
            cm_informed: 3,
            speed: 1.0,
            noise_std: None,
            seed,
        }
    }

    pub fn noise(&self) -> f64 {
        self.noise_std.unwrap_or(0.05 * self.speed)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n < 5 {
            return bad(format!("n = {} but scripts need at least 5 individuals", self.n));
        }
        if self.events == 0 || self.t_star == 0 || self.t_star > self.events * EVENT_LENGTH {
            return bad(format!(
                "t* = {} must lie in [1, {}] for {} events",
                self.t_star,
                self.events * EVENT_LENGTH,
                self.events
            ));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return bad(format!("speed {} must be positive", self.speed));
        }
        if !(self.noise().is_finite() && self.noise() >= 0.0) {
            return bad(format!("noise_std {} must be nonnegative", self.noise()));
        }
        match (self.model, self.ic) {
            (Model::Ic, None) => return bad("the cascade model needs k and rho".into()),
            (Model::Ic, Some(p)) => {
                if p.k == 0 || p.k >= self.n {
                    return bad(format!("k = {} must lie in [1, {}]", p.k, self.n - 1));
                }
                if !(p.rho > 0.0 && p.rho <= 1.0) {
                    return bad(format!("rho = {} must lie in (0, 1]", p.rho));
                }
            }
            (_, Some(_)) => return bad("k and rho apply only to the cascade model".into()),
            _ => {}
        }
        if self.model == Model::Cm && (self.cm_informed == 0 || self.cm_informed > self.n) {
            return bad(format!("cm_informed = {} is out of range", self.cm_informed));
        }
        Ok(())
    }
}

/// Copy delay of individual `i` behind whoever it follows.
pub fn follower_lag(i: usize) -> usize {
    1 + i % 5
}

type P = [f64; 2];

fn unit(v: P) -> P {
    let norm = v[0].hypot(v[1]);
    if norm > 0.0 {
        [v[0] / norm, v[1] / norm]
    } else {
        [0.0, 0.0]
    }
}

fn angle_of(v: P) -> f64 {
    v[1].atan2(v[0])
}

/// Per-faction motion state for one segment.
struct Group {
    leader: usize,
    members: Vec<usize>,
    informed: Vec<usize>,
    /// `predecessor[m]` for the hierarchy chain, `None` at the top.
    chain: Vec<(usize, Option<usize>)>,
    target: P,
    wander: f64,
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    pos: Vec<Vec<P>>,
    disp: Vec<Vec<P>>,
    active: Vec<bool>,
    attempted: Vec<bool>,
    frontier: Vec<usize>,
}

impl Engine<'_> {
    fn gauss(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn noise(&mut self, scale: f64) -> P {
        let s = self.cfg.noise() * scale;
        [s * self.gauss(), s * self.gauss()]
    }

    fn lagged(&self, tau: usize, who: usize, lag: usize) -> P {
        if tau >= lag {
            self.disp[tau - lag][who]
        } else {
            [0.0, 0.0]
        }
    }

    fn group(&mut self, f: &ScriptFaction, tau: usize) -> Group {
        let n = self.cfg.n;
        let informed = if self.cfg.model == Model::Cm {
            let others: Vec<usize> = f.members.iter().copied().filter(|&m| m != f.leader).collect();
            let extra = (self.cfg.cm_informed - 1).min(others.len());
            let mut informed: Vec<usize> = sample(&mut self.rng, others.len(), extra)
                .into_iter()
                .map(|k| others[k])
                .collect();
            informed.push(f.leader);
            informed.sort_unstable();
            informed
        } else {
            vec![f.leader]
        };
        let mut order = vec![f.leader];
        order.extend(f.members.iter().copied().filter(|&m| m != f.leader));
        let chain = order
            .iter()
            .enumerate()
            .map(|(r, &m)| (m, r.checked_sub(1).map(|p| order[p])))
            .collect();
        let angle = self.rng.random_range(0.0..TAU);
        let from = self.pos[tau.saturating_sub(1)][f.leader];
        let d = TARGET_DISTANCE * self.cfg.speed;
        debug_assert!(f.members.iter().all(|&m| m < n));
        Group {
            leader: f.leader,
            members: f.members.clone(),
            informed,
            chain,
            target: [from[0] + d * angle.cos(), from[1] + d * angle.sin()],
            wander: 0.0,
        }
    }

    /// Activation at the start of an event: leaders plus a `rho` sample.
    fn reset_cascade(&mut self, leaders: &[usize], rho: f64) {
        let n = self.cfg.n;
        self.attempted = vec![false; n * n];
        self.active = (0..n).map(|_| self.rng.random_bool(rho)).collect();
        for &l in leaders {
            self.active[l] = true;
        }
        self.frontier = (0..n).filter(|&i| self.active[i]).collect();
    }

    /// Each newly active individual tries its `k` nearest inactive ones once.
    fn cascade(&mut self, tau: usize, k: usize, rho: f64) {
        let n = self.cfg.n;
        let at = &self.pos[tau - 1];
        let frontier = std::mem::take(&mut self.frontier);
        let mut fresh = Vec::new();
        for a in frontier {
            let mut near: Vec<usize> = (0..n).filter(|&b| !self.active[b]).collect();
            let dist = |b: usize| (at[b][0] - at[a][0]).hypot(at[b][1] - at[a][1]);
            near.sort_by(|&x, &y| dist(x).total_cmp(&dist(y)).then(x.cmp(&y)));
            for b in near.into_iter().take(k) {
                if self.attempted[a * n + b] {
                    continue;
                }
                self.attempted[a * n + b] = true;
                if self.rng.random_bool(rho) {
                    self.active[b] = true;
                    fresh.push(b);
                }
            }
        }
        self.frontier = fresh;
    }

    fn step(&mut self, tau: usize, groups: &mut [Group], factor: f64) {
        let n = self.cfg.n;
        let speed = self.cfg.speed * factor;
        let mut d = vec![[0.0, 0.0]; n];
        let prev = self.pos[tau - 1].clone();
        for g in groups.iter_mut() {
            g.wander = WANDER_MEMORY * g.wander + WANDER_STD * self.gauss();
            let heading = |me: usize| {
                let toward = [g.target[0] - prev[me][0], g.target[1] - prev[me][1]];
                let a = angle_of(toward) + g.wander;
                [speed * a.cos(), speed * a.sin()]
            };
            match self.cfg.model {
                Model::Dm | Model::Ic => {
                    d[g.leader] = heading(g.leader);
                    for &m in &g.members {
                        if m == g.leader {
                            continue;
                        }
                        let follows = self.cfg.model == Model::Dm || self.active[m];
                        d[m] = if follows {
                            self.lagged(tau, g.leader, follower_lag(m))
                        } else {
                            [0.0, 0.0]
                        };
                    }
                }
                Model::Hm => {
                    for &(m, above) in &g.chain {
                        d[m] = match above {
                            None => heading(m),
                            Some(p) => self.lagged(tau, p, follower_lag(m)),
                        };
                    }
                }
                Model::Cm => {
                    let k = g.members.len() as f64;
                    let centroid = g.members.iter().fold([0.0, 0.0], |c, &m| {
                        [c[0] + prev[m][0] / k, c[1] + prev[m][1] / k]
                    });
                    for &m in &g.members {
                        if g.informed.contains(&m) {
                            d[m] = heading(m);
                            continue;
                        }
                        let lag = follower_lag(m);
                        let mean = g.members.iter().fold([0.0, 0.0], |c, &o| {
                            let h = unit(self.lagged(tau, o, lag));
                            [c[0] + h[0] / k, c[1] + h[1] / k]
                        });
                        let pull = unit([centroid[0] - prev[m][0], centroid[1] - prev[m][1]]);
                        let dir = unit([0.5 * pull[0] + 0.5 * mean[0], 0.5 * pull[1] + 0.5 * mean[1]]);
                        d[m] = [speed * dir[0], speed * dir[1]];
                    }
                }
            }
        }
        let mut next = prev;
        for i in 0..n {
            let z = self.noise(factor);
            d[i] = [d[i][0] + z[0], d[i][1] + z[1]];
            next[i] = [next[i][0] + d[i][0], next[i][1] + d[i][1]];
        }
        self.disp.push(d);
        self.pos.push(next);
    }
}

fn speed_factor(seg: &ScriptSegment, t: usize) -> f64 {
    match seg.kind {
        SegmentKind::Moving => 1.0,
        SegmentKind::Stopping => (seg.end - t) as f64 / (seg.end - seg.start + 1) as f64,
        SegmentKind::Stopped => 0.0,
    }
}

/// Trajectories following the event script, with their ground truth.
///
/// Individual index `k` carries id `k + 1`. The same configuration always
/// yields identical output.
pub fn simulate(cfg: &SimConfig) -> Result<(Dataset, GroundTruth)> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start: Vec<P> = (0..n)
        .map(|_| {
            let r = START_RADIUS * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..TAU);
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let mut engine = Engine {
        cfg,
        rng,
        pos: vec![start],
        disp: vec![vec![[0.0, 0.0]; n]],
        active: vec![true; n],
        attempted: Vec::new(),
        frontier: Vec::new(),
    };
    let script = full_script(cfg.event_type, cfg.events, n, cfg.t_star);
    let mut truth = Vec::with_capacity(script.len());
    let mut groups: Vec<Group> = Vec::new();
    for seg in &script {
        if !seg.factions.is_empty() {
            groups = seg.factions.iter().map(|f| engine.group(f, seg.start - 1)).collect();
        }
        if let (Some(p), true) = (cfg.ic, (seg.start - 1) % EVENT_LENGTH == 0) {
            let leaders: Vec<usize> = groups.iter().map(|g| g.leader).collect();
            engine.reset_cascade(&leaders, p.rho);
        }
        for g in &groups {
            engine.active[g.leader] = true;
        }
        truth.push(TruthSegment {
            start: seg.start,
            end: seg.end,
            kind: seg.kind,
            factions: if seg.kind == SegmentKind::Stopped {
                Vec::new()
            } else {
                groups
                    .iter()
                    .map(|g| TruthFaction {
                        leader: g.leader,
                        members: g.members.clone(),
                        informed: g.informed.clone(),
                        hierarchy: (cfg.model == Model::Hm).then(|| g.chain.iter().map(|c| c.0).collect()),
                    })
                    .collect()
            },
        });
        for t in seg.start..=seg.end {
            // Step 1 is the starting position.
            if t == 1 {
                continue;
            }
            if let Some(p) = cfg.ic {
                engine.cascade(t - 1, p.k, p.rho);
            }
            engine.step(t - 1, &mut groups, speed_factor(seg, t));
        }
    }
    let ids: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
    let series = (0..n)
        .map(|i| {
            let values = engine.pos.iter().flat_map(|p| p[i]).collect();
            TimeSeries::new(ids[i].clone(), 2, values)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Dataset::new(series)?, GroundTruth::new(ids, truth)?))
}

/// Everything needed to regenerate a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: SimConfig,
    pub noise_std: f64,
    pub follower_lag: String,
    pub ids: Vec<String>,
}

impl Manifest {
    pub fn new(cfg: &SimConfig, ids: Vec<String>) -> Self {
        Self {
            config: cfg.clone(),
            noise_std: cfg.noise(),
            follower_lag: "1 + (index mod 5)".into(),
            ids,
        }
    }
}
