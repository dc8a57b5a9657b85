use std::collections::BTreeMap;

use super::{NetworkTopology, SectionKind};
use crate::ids::{SectionId, TrackId};

/// Longest tensionable wire run, two miles.
pub const MAX_WIRE_RUN_FT: i64 = 10_560;

/// An electrically continuous trolley stretch on one track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WireRun {
    pub track: TrackId,
    pub sections: Vec<SectionId>,
    pub start_ft: i64,
    pub end_ft: i64,
    pub length_ft: i64,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Every maximal run of same-track trolley sections joined end to end (a
/// shared node) whose total length exceeds [`MAX_WIRE_RUN_FT`]. A run ends
/// wherever no further same-track section shares the node: an insulator, a
/// device, or the end of the wire.
pub fn wire_run_check(topology: &NetworkTopology) -> Vec<WireRun> {
    wire_runs(topology).into_iter().filter(|r| r.length_ft > MAX_WIRE_RUN_FT).collect()
}

/// All maximal wire runs, longest first within each track.
pub fn wire_runs(topology: &NetworkTopology) -> Vec<WireRun> {
    let trolley: Vec<_> = topology
        .sections()
        .values()
        .filter(|s| s.kind == SectionKind::Trolley)
        .collect();
    let mut parent: Vec<usize> = (0..trolley.len()).collect();
    let mut by_node: BTreeMap<(&TrackId, &str), usize> = BTreeMap::new();
    for (i, s) in trolley.iter().enumerate() {
        let track = s.track.as_ref().expect("validated trolley section has a track");
        for end in [&s.endpoints.0, &s.endpoints.1] {
            match by_node.get(&(track, end.as_str())) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
                None => {
                    by_node.insert((track, end.as_str()), i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..trolley.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut runs: Vec<WireRun> = groups
        .into_values()
        .map(|members| {
            let mut ids: Vec<SectionId> = members.iter().map(|&i| trolley[i].id.clone()).collect();
            ids.sort();
            WireRun {
                track: trolley[members[0]].track.clone().unwrap(),
                sections: ids,
                start_ft: members.iter().map(|&i| trolley[i].start_ft).min().unwrap(),
                end_ft: members.iter().map(|&i| trolley[i].end_ft).max().unwrap(),
                length_ft: members.iter().map(|&i| trolley[i].length_ft()).sum(),
            }
        })
        .collect();
    runs.sort_by(|a, b| a.track.cmp(&b.track).then(b.length_ft.cmp(&a.length_ft)).then(a.start_ft.cmp(&b.start_ft)));
    runs
}
