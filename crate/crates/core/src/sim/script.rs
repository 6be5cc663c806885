//! Scripted coordination events: who leads whom, and when.

use serde::{Deserialize, Serialize};

/// Steps per scripted event.
pub const EVENT_LENGTH: usize = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    /// Leadership passes ID1 -> ID2 -> ID3 -> ID4, then everyone stops.
    Linear,
    /// ID1's group splits three ways, merges under ID3, then stops.
    MergeSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Moving,
    /// Speed decays linearly to zero over the segment.
    Stopping,
    /// No faction; nobody moves.
    Stopped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptFaction {
    /// 0-based index; index `k` is individual ID`k+1`.
    pub leader: usize,
    /// Ascending, leader included.
    pub members: Vec<usize>,
}

/// Inclusive 1-based steps `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptSegment {
    pub start: usize,
    pub end: usize,
    pub kind: SegmentKind,
    pub factions: Vec<ScriptFaction>,
}

fn whole(leader: usize, n: usize) -> Vec<ScriptFaction> {
    vec![ScriptFaction {
        leader,
        members: (0..n).collect(),
    }]
}

/// Segment table of event `index` for `n` individuals.
///
/// Segments last 200, 200, 200, 100 and 100 steps. During the three-way
/// split, individual ID`k` goes to ID2 when `k mod 3 = 2`, to ID3 when
/// `k mod 3 = 0` and to ID4 otherwise, which sends ID1 to ID4.
pub fn event_script(event_type: EventType, index: usize, n: usize) -> Vec<ScriptSegment> {
    assert!(n >= 4, "scripts need at least four individuals");
    let o = index * EVENT_LENGTH;
    let seg = |start: usize, end: usize, kind, factions| ScriptSegment {
        start: o + start,
        end: o + end,
        kind,
        factions,
    };
    let middle = match event_type {
        EventType::Linear => vec![
            seg(201, 400, SegmentKind::Moving, whole(1, n)),
            seg(401, 600, SegmentKind::Moving, whole(2, n)),
        ],
        EventType::MergeSplit => {
            let split = [1, 2, 3]
                .into_iter()
                .map(|leader| ScriptFaction {
                    leader,
                    members: (0..n).filter(|&k| split_leader(k) == leader).collect(),
                })
                .collect();
            vec![
                seg(201, 400, SegmentKind::Moving, split),
                seg(401, 600, SegmentKind::Moving, whole(2, n)),
            ]
        }
    };
    let mut out = vec![seg(1, 200, SegmentKind::Moving, whole(0, n))];
    out.extend(middle);
    out.push(seg(601, 700, SegmentKind::Stopping, whole(3, n)));
    out.push(seg(701, 800, SegmentKind::Stopped, Vec::new()));
    out
}

fn split_leader(k: usize) -> usize {
    match (k + 1) % 3 {
        2 => 1,
        0 => 2,
        _ => 3,
    }
}

/// Segments of `events` consecutive events, cut off after `t_star` steps.
pub fn full_script(event_type: EventType, events: usize, n: usize, t_star: usize) -> Vec<ScriptSegment> {
    let mut out = Vec::new();
    for e in 0..events {
        for mut s in event_script(event_type, e, n) {
            if s.start > t_star {
                return out;
            }
            s.end = s.end.min(t_star);
            out.push(s);
        }
    }
    out
}
