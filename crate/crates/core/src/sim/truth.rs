//! Ground truth produced alongside simulated trajectories.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::script::SegmentKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthFaction {
    pub leader: usize,
    /// Ascending, leader included.
    pub members: Vec<usize>,
    /// Individuals that know the target; just the leader outside the crowd model.
    pub informed: Vec<usize>,
    /// Following chain from the top, present for the hierarchical model.
    pub hierarchy: Option<Vec<usize>>,
}

/// Inclusive 1-based steps `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthSegment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub factions: Vec<TruthFaction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    ids: Vec<String>,
    len: usize,
    segments: Vec<TruthSegment>,
}

impl GroundTruth {
    /// Segments must tile `1..=len` in order.
    pub fn new(ids: Vec<String>, segments: Vec<TruthSegment>) -> Result<Self> {
        let mut next = 1;
        for s in &segments {
            if s.start != next || s.end < s.start {
                return Err(Error::Malformed(format!(
                    "truth segment {}..={} does not continue from step {next}",
                    s.start, s.end
                )));
            }
            for f in &s.factions {
                if f.members.iter().chain(&f.informed).any(|&m| m >= ids.len()) {
                    return Err(Error::Malformed("truth member outside the id list".into()));
                }
            }
            next = s.end + 1;
        }
        Ok(Self {
            len: next - 1,
            ids,
            segments,
        })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn segments(&self) -> &[TruthSegment] {
        &self.segments
    }

    /// Segment containing the 1-based step `t`.
    pub fn segment_at(&self, t: usize) -> &TruthSegment {
        let k = self.segments.partition_point(|s| s.end < t);
        &self.segments[k]
    }

    pub fn factions_at(&self, t: usize) -> &[TruthFaction] {
        &self.segment_at(t).factions
    }

    /// Leader of each individual's faction at `t`.
    pub fn assignment(&self, t: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n()];
        for f in self.factions_at(t) {
            for &m in &f.members {
                out[m] = Some(f.leader);
            }
        }
        out
    }

    /// True when nobody moves at `t`.
    pub fn is_stopped(&self, t: usize) -> bool {
        self.segment_at(t).kind == SegmentKind::Stopped
    }

    /// Relabels individuals so that old index `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut ids = vec![String::new(); self.n()];
        for (old, id) in self.ids.iter().enumerate() {
            ids[perm[old]] = id.clone();
        }
        let map = |v: &[usize]| -> Vec<usize> { v.iter().map(|&m| perm[m]).collect() };
        let sorted = |v: &[usize]| -> Vec<usize> {
            let mut v = map(v);
            v.sort_unstable();
            v
        };
        let segments = self
            .segments
            .iter()
            .map(|s| TruthSegment {
                start: s.start,
                end: s.end,
                kind: s.kind,
                factions: s
                    .factions
                    .iter()
                    .map(|f| TruthFaction {
                        leader: perm[f.leader],
                        members: sorted(&f.members),
                        informed: sorted(&f.informed),
                        hierarchy: f.hierarchy.as_deref().map(map),
                    })
                    .collect(),
            })
            .collect();
        Self {
            ids,
            len: self.len,
            segments,
        }
    }

    pub fn to_export(&self) -> TruthExport {
        let id = |k: usize| self.ids[k].clone();
        let ids = |v: &[usize]| -> Vec<String> { v.iter().map(|&k| id(k)).collect() };
        let mut steps = Vec::with_capacity(self.len);
        for s in &self.segments {
            let mut assignment: BTreeMap<String, Option<String>> =
                self.ids.iter().map(|i| (i.clone(), None)).collect();
            let mut leaders = BTreeMap::new();
            for f in &s.factions {
                for &m in &f.members {
                    assignment.insert(id(m), Some(id(f.leader)));
                }
                leaders.insert(id(f.leader), ids(&f.informed));
            }
            for t in s.start..=s.end {
                steps.push(TruthStepExport {
                    t,
                    assignment: assignment.clone(),
                    leaders: leaders.clone(),
                });
            }
        }
        TruthExport {
            ids: self.ids.clone(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentExport {
                    start: s.start,
                    end: s.end,
                    kind: s.kind,
                    factions: s
                        .factions
                        .iter()
                        .map(|f| TruthFactionExport {
                            leader: id(f.leader),
                            members: ids(&f.members),
                            informed: ids(&f.informed),
                            hierarchy: f.hierarchy.as_deref().map(ids),
                        })
                        .collect(),
                })
                .collect(),
            steps,
        }
    }

    /// Rebuilds the truth from the segment table of an export.
    pub fn from_export(export: &TruthExport) -> Result<Self> {
        let index: BTreeMap<&str, usize> = export
            .ids
            .iter()
            .enumerate()
            .map(|(k, id)| (id.as_str(), k))
            .collect();
        let look = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Malformed(format!("unknown id {id} in truth")))
        };
        let many = |v: &[String]| -> Result<Vec<usize>> { v.iter().map(|i| look(i)).collect() };
        let segments = export
            .segments
            .iter()
            .map(|s| {
                Ok(TruthSegment {
                    start: s.start,
                    end: s.end,
                    kind: s.kind,
                    factions: s
                        .factions
                        .iter()
                        .map(|f| {
                            let mut members = many(&f.members)?;
                            members.sort_unstable();
                            let mut informed = many(&f.informed)?;
                            informed.sort_unstable();
                            Ok(TruthFaction {
                                leader: look(&f.leader)?,
                                members,
                                informed,
                                hierarchy: f.hierarchy.as_deref().map(many).transpose()?,
                            })
                        })
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(export.ids.clone(), segments)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(w, &self.to_export())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        Self::from_export(&serde_json::from_reader(r)?)
    }
}

/// JSON form: a per-step view plus the segment table it expands from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthExport {
    pub ids: Vec<String>,
    pub steps: Vec<TruthStepExport>,
    pub segments: Vec<SegmentExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthStepExport {
    pub t: usize,
    /// Individual to its faction leader, `null` when unassigned.
    pub assignment: BTreeMap<String, Option<String>>,
    /// Faction leader to its informed individuals.
    pub leaders: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentExport {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub factions: Vec<TruthFactionExport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFactionExport {
    pub leader: String,
    pub members: Vec<String>,
    pub informed: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hierarchy: Option<Vec<String>>,
}
