//! JSON and CSV forms of a faction timeline, keyed by series id.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EventKind, FactionEvent, FactionSnapshot, FactionTimeline, TimelineStep};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineExport {
    /// Series ids in node order.
    pub ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<usize>,
    pub steps: Vec<StepExport>,
    pub intervals: Vec<IntervalExport>,
    #[serde(default)]
    pub events: Vec<EventExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepExport {
    pub t: usize,
    pub factions: Vec<FactionExport>,
    /// Initiator each individual is attributed to; `null` when unassigned.
    pub assignment: BTreeMap<String, Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactionExport {
    pub initiator: String,
    pub members: Vec<String>,
    pub size_ratio: f64,
    pub ranks: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalExport {
    pub initiator: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventExport {
    pub t: usize,
    pub kind: EventKind,
    pub initiators_before: Vec<String>,
    pub initiators_after: Vec<String>,
}

impl TimelineExport {
    pub fn new(timeline: &FactionTimeline, ids: &[String], events: &[FactionEvent], omega: Option<usize>) -> Self {
        let name = |v: usize| ids[v].clone();
        let names = |vs: &[usize]| vs.iter().map(|&v| ids[v].clone()).collect::<Vec<_>>();
        Self {
            ids: ids.to_vec(),
            omega,
            steps: timeline
                .steps()
                .iter()
                .map(|s| StepExport {
                    t: s.t,
                    factions: s
                        .factions
                        .iter()
                        .map(|f| FactionExport {
                            initiator: name(f.initiator),
                            members: names(&f.members),
                            size_ratio: f.size_ratio,
                            ranks: f.ranks.iter().map(|(&k, &v)| (name(k), v)).collect(),
                        })
                        .collect(),
                    assignment: s
                        .assignment
                        .iter()
                        .enumerate()
                        .map(|(v, a)| (name(v), a.map(name)))
                        .collect(),
                })
                .collect(),
            intervals: timeline
                .intervals()
                .iter()
                .map(|iv| IntervalExport {
                    initiator: name(iv.initiator),
                    start: iv.start,
                    end: iv.end,
                })
                .collect(),
            events: events
                .iter()
                .map(|e| EventExport {
                    t: e.t,
                    kind: e.kind,
                    initiators_before: names(&e.initiators_before),
                    initiators_after: names(&e.initiators_after),
                })
                .collect(),
        }
    }

    /// Rebuilds the index-based timeline; intervals are recomputed.
    pub fn to_timeline(&self) -> Result<FactionTimeline> {
        let index: HashMap<&str, usize> = self.ids.iter().enumerate().map(|(k, id)| (id.as_str(), k)).collect();
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Mismatch(format!("unknown id {id}")))
        };
        let n = self.ids.len();
        let steps = self
            .steps
            .iter()
            .map(|s| {
                let factions = s
                    .factions
                    .iter()
                    .map(|f| {
                        let mut members = f.members.iter().map(|m| lookup(m)).collect::<Result<Vec<_>>>()?;
                        members.sort_unstable();
                        Ok(FactionSnapshot {
                            t: s.t,
                            initiator: lookup(&f.initiator)?,
                            members,
                            size_ratio: f.size_ratio,
                            ranks: f
                                .ranks
                                .iter()
                                .map(|(k, &v)| Ok((lookup(k)?, v)))
                                .collect::<Result<_>>()?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut assignment = vec![None; n];
                for (id, a) in &s.assignment {
                    assignment[lookup(id)?] = a.as_deref().map(lookup).transpose()?;
                }
                Ok(TimelineStep {
                    t: s.t,
                    factions,
                    assignment,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FactionTimeline::from_steps(n, steps)
    }
}

/// Plot-ready `t,initiator,faction_size_ratio` rows, one per faction per step.
pub fn write_size_ratio_trace<W: Write>(timeline: &FactionTimeline, ids: &[String], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["t", "initiator", "faction_size_ratio"])?;
    for s in timeline.steps() {
        for f in &s.factions {
            wtr.write_record([s.t.to_string(), ids[f.initiator].clone(), f.size_ratio.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
