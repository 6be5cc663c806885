//! Merge and split events from membership flow between consecutive steps.
//!
//! Flow is measured on the single-faction assignment of each step, so nodes
//! sitting in two overlapping factions do not register as flow.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FactionTimeline, TimelineStep};

/// Minimum members two factions must share to count as membership flow.
pub const MIN_SHARED_MEMBERS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Merge,
    Split,
}

/// `t` is the first step of the new configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactionEvent {
    pub t: usize,
    pub kind: EventKind,
    pub initiators_before: Vec<usize>,
    pub initiators_after: Vec<usize>,
}

/// Shared-member counts keyed by (initiator before, initiator after).
fn flow(prev: &TimelineStep, cur: &TimelineStep) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for (a, b) in prev.assignment.iter().zip(&cur.assignment) {
        if let (Some(a), Some(b)) = (a, b) {
            *counts.entry((*a, *b)).or_insert(0) += 1;
        }
    }
    counts
}

/// A split at `t` is one faction at `t - 1` passing at least
/// [`MIN_SHARED_MEMBERS`] members to each of two or more factions at `t`;
/// a merge is the mirror image.
pub fn detect_merge_split(timeline: &FactionTimeline) -> Vec<FactionEvent> {
    let mut events = Vec::new();
    for pair in timeline.steps().windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if prev.assignment == cur.assignment {
            continue;
        }
        let strong: Vec<(usize, usize)> = flow(prev, cur)
            .into_iter()
            .filter(|&(_, c)| c >= MIN_SHARED_MEMBERS)
            .map(|(k, _)| k)
            .collect();

        let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut by_target: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(a, b) in &strong {
            by_source.entry(a).or_default().push(b);
            by_target.entry(b).or_default().push(a);
        }
        for (a, after) in by_source {
            if after.len() >= 2 {
                events.push(FactionEvent {
                    t: cur.t,
                    kind: EventKind::Split,
                    initiators_before: vec![a],
                    initiators_after: after,
                });
            }
        }
        for (b, before) in by_target {
            if before.len() >= 2 {
                events.push(FactionEvent {
                    t: cur.t,
                    kind: EventKind::Merge,
                    initiators_before: before,
                    initiators_after: vec![b],
                });
            }
        }
    }
    events
}
