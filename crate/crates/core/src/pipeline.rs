//! End-to-end inference: dynamic network, faction timeline and events.

use crate::coordination::{infer_window_with, WindowSweep};
use crate::error::Result;
use crate::factions::{detect_merge_split, find_factions_and_initiators, FactionEvent, FactionTimeline, TimelineExport};
use crate::network::{DynamicNetwork, NetworkOptions};
use crate::series::Dataset;

#[derive(Debug, Clone)]
pub struct Inference {
    pub omega: usize,
    pub dynamic: DynamicNetwork,
    pub timeline: FactionTimeline,
    pub events: Vec<FactionEvent>,
}

impl Inference {
    pub fn to_export(&self, ids: &[String]) -> TimelineExport {
        TimelineExport::new(&self.timeline, ids, &self.events, Some(self.omega))
    }
}

/// Runs the pipeline at a fixed window length.
pub fn infer(u: &Dataset, omega: usize, opts: &NetworkOptions) -> Result<Inference> {
    let dynamic = crate::network::create_dynamic_network(u, omega, opts)?;
    let timeline = find_factions_and_initiators(&dynamic)?;
    let events = detect_merge_split(&timeline);
    Ok(Inference {
        omega,
        dynamic,
        timeline,
        events,
    })
}

/// Picks the window length from `candidates` first, then runs the pipeline.
pub fn infer_auto(u: &Dataset, candidates: &[usize], opts: &NetworkOptions) -> Result<(WindowSweep, Inference)> {
    let sweep = infer_window_with(u, candidates, opts)?;
    let inference = infer(u, sweep.chosen, opts)?;
    Ok((sweep, inference))
}
