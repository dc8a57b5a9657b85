use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::{DeviceKind, SectionKind, TopologyBuilder};
use crate::ids::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IssueKind {
    DuplicateId,
    DanglingReference,
    PhaseCrossing,
    OverlappingSections,
    InvalidSpan,
    DegenerateEndpoints,
    TrackMismatch,
    DeviceRating,
    RemoteTravel,
    ZoneCrossingDevice,
    KeepLiveNotTrolley,
    SwitchInMultipleInterlockings,
    PlateOrderLimits,
}

impl IssueKind {
    pub fn code(self) -> &'static str {
        match self {
            IssueKind::DuplicateId => "DUPLICATE_ID",
            IssueKind::DanglingReference => "DANGLING_REFERENCE",
            IssueKind::PhaseCrossing => "PHASE_CROSSING",
            IssueKind::OverlappingSections => "OVERLAPPING_SECTIONS",
            IssueKind::InvalidSpan => "INVALID_SPAN",
            IssueKind::DegenerateEndpoints => "DEGENERATE_ENDPOINTS",
            IssueKind::TrackMismatch => "TRACK_MISMATCH",
            IssueKind::DeviceRating => "DEVICE_RATING",
            IssueKind::RemoteTravel => "REMOTE_TRAVEL",
            IssueKind::ZoneCrossingDevice => "ZONE_CROSSING_DEVICE",
            IssueKind::KeepLiveNotTrolley => "KEEPLIVE_NOT_TROLLEY",
            IssueKind::SwitchInMultipleInterlockings => "SWITCH_IN_MULTIPLE_INTERLOCKINGS",
            IssueKind::PlateOrderLimits => "PLATE_ORDER_LIMITS",
        }
    }
}

/// One validation failure. `line` is the 1-based document line, or 0 for
/// records that were not parsed from text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub line: usize,
    pub participants: Vec<String>,
    pub detail: String,
}

impl ValidationIssue {
    pub(crate) fn new(kind: IssueKind, line: usize, participants: Vec<String>, detail: impl Into<String>) -> Self {
        Self { kind, line, participants, detail: detail.into() }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        write!(f, "{} [{}] {}", self.kind.code(), self.participants.join(","), self.detail)
    }
}

fn duplicates<'a, I>(kind: &str, items: I, out: &mut Vec<ValidationIssue>)
where
    I: IntoIterator<Item = (&'a str, usize)>,
{
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (id, line) in items {
        if let Some(first) = seen.get(id) {
            out.push(ValidationIssue::new(
                IssueKind::DuplicateId,
                line,
                vec![id.to_owned()],
                format!("{kind} `{id}` already declared (line {first})"),
            ));
        } else {
            seen.insert(id, line);
        }
    }
}

pub(crate) fn validate(b: &TopologyBuilder) -> Vec<ValidationIssue> {
    let mut out = Vec::new();

    duplicates("zone", b.zones.iter().map(|(z, l)| (z.as_str(), *l)), &mut out);
    duplicates("node", b.nodes.iter().map(|(n, l)| (n.id.as_str(), *l)), &mut out);
    duplicates("section", b.sections.iter().map(|(s, l)| (s.id.as_str(), *l)), &mut out);
    // Tags are keyed by device-or-ground id, so the two share a namespace.
    duplicates(
        "device/ground",
        b.devices
            .iter()
            .map(|(d, l)| (d.id.as_str(), *l))
            .chain(b.grounds.iter().map(|(g, l)| (g.id.as_str(), *l))),
        &mut out,
    );
    duplicates("source", b.sources.iter().map(|(s, _, _, l)| (s.as_str(), *l)), &mut out);
    duplicates("track", b.tracks.iter().map(|(t, l)| (t.as_str(), *l)), &mut out);
    duplicates("switch", b.switches.iter().map(|(s, l)| (s.id.as_str(), *l)), &mut out);
    duplicates("interlocking", b.interlockings.iter().map(|(i, l)| (i.id.as_str(), *l)), &mut out);

    let zones: HashSet<&str> = b.zones.iter().map(|(z, _)| z.as_str()).collect();
    let node_zone: HashMap<&str, &ZoneId> = b.nodes.iter().map(|(n, _)| (n.id.as_str(), &n.zone)).collect();
    let tracks: HashSet<&str> = b.tracks.iter().map(|(t, _)| t.as_str()).collect();

    let dangling = |out: &mut Vec<ValidationIssue>, line: usize, owner: &str, what: &str, id: &str| {
        out.push(ValidationIssue::new(
            IssueKind::DanglingReference,
            line,
            vec![owner.to_owned(), id.to_owned()],
            format!("`{owner}` references unknown {what} `{id}`"),
        ));
    };

    for (n, line) in &b.nodes {
        if !zones.contains(n.zone.as_str()) {
            dangling(&mut out, *line, n.id.as_str(), "zone", n.zone.as_str());
        }
    }

    for (s, line) in &b.sections {
        let sid = s.id.as_str();
        let mut ends_ok = true;
        for end in [&s.endpoints.0, &s.endpoints.1] {
            if !node_zone.contains_key(end.as_str()) {
                dangling(&mut out, *line, sid, "node", end.as_str());
                ends_ok = false;
            }
        }
        if s.start_ft >= s.end_ft {
            out.push(ValidationIssue::new(
                IssueKind::InvalidSpan,
                *line,
                vec![sid.to_owned()],
                format!("span start {} must be below end {}", s.start_ft, s.end_ft),
            ));
        }
        if s.endpoints.0 == s.endpoints.1 {
            out.push(ValidationIssue::new(
                IssueKind::DegenerateEndpoints,
                *line,
                vec![sid.to_owned()],
                "section endpoints must be distinct",
            ));
        } else if ends_ok && node_zone[s.endpoints.0.as_str()] != node_zone[s.endpoints.1.as_str()] {
            out.push(ValidationIssue::new(
                IssueKind::PhaseCrossing,
                *line,
                vec![sid.to_owned(), s.endpoints.0.to_string(), s.endpoints.1.to_string()],
                "section endpoints lie in different phase zones",
            ));
        }
        match (s.kind, &s.track) {
            (SectionKind::Trolley, None) => out.push(ValidationIssue::new(
                IssueKind::TrackMismatch,
                *line,
                vec![sid.to_owned()],
                "trolley section requires a track",
            )),
            (SectionKind::Trolley, Some(t)) if !tracks.contains(t.as_str()) => {
                dangling(&mut out, *line, sid, "track", t.as_str())
            }
            (k, Some(_)) if k != SectionKind::Trolley => out.push(ValidationIssue::new(
                IssueKind::TrackMismatch,
                *line,
                vec![sid.to_owned()],
                "only trolley sections carry a track",
            )),
            _ => {}
        }
    }

    // Trolley sections on one track must not overlap in stationing.
    let mut by_track: BTreeMap<&str, Vec<(i64, i64, &str, usize)>> = BTreeMap::new();
    for (s, line) in &b.sections {
        if let (SectionKind::Trolley, Some(t)) = (s.kind, &s.track) {
            by_track.entry(t.as_str()).or_default().push((s.start_ft, s.end_ft, s.id.as_str(), *line));
        }
    }
    for spans in by_track.values_mut() {
        spans.sort();
        for i in 0..spans.len() {
            for j in (i + 1)..spans.len() {
                let (a, b) = (spans[i], spans[j]);
                if b.0 >= a.1 {
                    break;
                }
                out.push(ValidationIssue::new(
                    IssueKind::OverlappingSections,
                    a.3.max(b.3),
                    vec![a.2.to_owned(), b.2.to_owned()],
                    format!("trolley sections overlap on [{}, {})", b.0, a.1.min(b.1)),
                ));
            }
        }
    }

    for (d, line) in &b.devices {
        let did = d.id.as_str();
        let mut ends_ok = true;
        for end in [&d.terminals.0, &d.terminals.1] {
            if !node_zone.contains_key(end.as_str()) {
                dangling(&mut out, *line, did, "node", end.as_str());
                ends_ok = false;
            }
        }
        if d.terminals.0 == d.terminals.1 {
            out.push(ValidationIssue::new(
                IssueKind::DegenerateEndpoints,
                *line,
                vec![did.to_owned()],
                "device terminals must be distinct",
            ));
        } else if ends_ok
            && node_zone[d.terminals.0.as_str()] != node_zone[d.terminals.1.as_str()]
            && d.kind != DeviceKind::Tie
        {
            out.push(ValidationIssue::new(
                IssueKind::ZoneCrossingDevice,
                *line,
                vec![did.to_owned()],
                "only tie devices may bridge a phase break",
            ));
        }
        let rating_ok = match d.kind {
            DeviceKind::Breaker => d.load_break,
            DeviceKind::Mod | DeviceKind::KnifeSwitch => !d.load_break,
            DeviceKind::Tie => true,
        };
        if !rating_ok {
            out.push(ValidationIssue::new(
                IssueKind::DeviceRating,
                *line,
                vec![did.to_owned()],
                format!("{} cannot have loadbreak={}", d.kind, d.load_break as u8),
            ));
        }
        if d.rackable && d.kind != DeviceKind::Breaker {
            out.push(ValidationIssue::new(
                IssueKind::DeviceRating,
                *line,
                vec![did.to_owned()],
                "only breakers are rackable",
            ));
        }
        if d.control == super::Control::Remote && d.travel_minutes != 0 {
            out.push(ValidationIssue::new(
                IssueKind::RemoteTravel,
                *line,
                vec![did.to_owned()],
                "remote devices have zero travel time",
            ));
        }
    }

    for (id, _, node, line) in &b.sources {
        if !node_zone.contains_key(node.as_str()) {
            dangling(&mut out, *line, id.as_str(), "node", node.as_str());
        }
    }
    for (g, line) in &b.grounds {
        if !node_zone.contains_key(g.node.as_str()) {
            dangling(&mut out, *line, g.id.as_str(), "node", g.node.as_str());
        }
    }

    for (sw, line) in &b.switches {
        for t in [&sw.tracks.0, &sw.tracks.1] {
            if !tracks.contains(t.as_str()) {
                dangling(&mut out, *line, sw.id.as_str(), "track", t.as_str());
            }
        }
    }
    let switch_ids: HashSet<&str> = b.switches.iter().map(|(s, _)| s.id.as_str()).collect();
    let mut owner: HashMap<&str, &str> = HashMap::new();
    for (il, line) in &b.interlockings {
        if il.start_ft >= il.end_ft {
            out.push(ValidationIssue::new(
                IssueKind::InvalidSpan,
                *line,
                vec![il.id.to_string()],
                "interlocking span start must be below end",
            ));
        }
        for sw in &il.switches {
            if !switch_ids.contains(sw.as_str()) {
                dangling(&mut out, *line, il.id.as_str(), "switch", sw.as_str());
            }
            if let Some(prev) = owner.insert(sw.as_str(), il.id.as_str()) {
                if prev != il.id.as_str() {
                    out.push(ValidationIssue::new(
                        IssueKind::SwitchInMultipleInterlockings,
                        *line,
                        vec![sw.to_string(), prev.to_owned(), il.id.to_string()],
                        "a switch belongs to at most one interlocking",
                    ));
                }
            }
        }
    }

    let trolley: HashSet<&str> = b
        .sections
        .iter()
        .filter(|(s, _)| s.kind == SectionKind::Trolley)
        .map(|(s, _)| s.id.as_str())
        .collect();
    let all_sections: HashSet<&str> = b.sections.iter().map(|(s, _)| s.id.as_str()).collect();
    for (k, line) in &b.keep_live {
        if !all_sections.contains(k.as_str()) {
            dangling(&mut out, *line, "keeplive", "section", k.as_str());
        } else if !trolley.contains(k.as_str()) {
            out.push(ValidationIssue::new(
                IssueKind::KeepLiveNotTrolley,
                *line,
                vec![k.to_string()],
                "keep-live assets must be trolley sections",
            ));
        }
    }

    out.sort_by_key(|i| i.line);
    out
}
