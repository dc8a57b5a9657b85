//! Static model of the catenary, feeder and track network.
//!
//! A [`NetworkTopology`] is built from a [`TopologyBuilder`], either by hand or
//! by parsing a network document (see [`parse_network`]). Parsing and
//! validation are separate steps: [`TopologyBuilder::validate`] can be run on
//! any builder, including one recovered from an existing topology with
//! [`NetworkTopology::to_builder`].
//!
//! Insulation points (section insulators, air gaps, phase breaks) are not
//! objects. Two nodes are insulated from each other when no section joins
//! them; only a device can bridge the gap.

mod document;
mod validate;
mod wire_run;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::ids::*;
use crate::plate_orders::PlateLibrary;

pub use crate::records::DocumentError;
pub use document::{load_topology, parse_network, LoadError};
pub use validate::{IssueKind, ValidationIssue};
pub use wire_run::{wire_run_check, wire_runs, WireRun, MAX_WIRE_RUN_FT};

/// Catenary structures are assumed to be spaced this far apart, so a
/// 30-structure work zone is 9,000 ft.
pub const CATENARY_SPACING_FT: i64 = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectionKind {
    Trolley,
    Feeder,
    SupplyTap,
    SignalFeeder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeviceKind {
    Breaker,
    Mod,
    KnifeSwitch,
    Tie,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Control {
    Remote,
    Manual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SourceKind {
    SupplySubstation,
    EqualizingSubstation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundKind {
    Local,
    Aerial,
    Box,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectricalNode {
    pub id: NodeId,
    pub zone: ZoneId,
    /// Stationing in feet.
    pub location_ft: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub id: SectionId,
    pub kind: SectionKind,
    /// Present exactly when `kind` is trolley.
    pub track: Option<TrackId>,
    /// Feeder group for non-trolley sections.
    pub group: Option<LineGroup>,
    pub endpoints: (NodeId, NodeId),
    pub start_ft: i64,
    pub end_ft: i64,
    pub catenary_count: u32,
}

impl Section {
    pub fn length_ft(&self) -> i64 {
        self.end_ft - self.start_ft
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Device {
    pub id: DeviceId,
    pub kind: DeviceKind,
    pub terminals: (NodeId, NodeId),
    pub load_break: bool,
    pub control: Control,
    pub travel_minutes: u32,
    pub rackable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub id: SourceId,
    pub node: NodeId,
    pub kind: SourceKind,
    pub zone: ZoneId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundPoint {
    pub id: GroundId,
    pub node: NodeId,
    pub kind: GroundKind,
}

impl GroundPoint {
    pub fn requires_pole_climb(&self) -> bool {
        self.kind == GroundKind::Aerial
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackSwitch {
    pub id: SwitchId,
    pub tracks: (TrackId, TrackId),
    pub location_ft: i64,
}

impl TrackSwitch {
    pub fn serves(&self, track: &TrackId) -> bool {
        &self.tracks.0 == track || &self.tracks.1 == track
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interlocking {
    pub id: InterlockingId,
    pub start_ft: i64,
    pub end_ft: i64,
    pub switches: Vec<SwitchId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrackLayout {
    pub tracks: Vec<TrackId>,
    pub switches: Vec<TrackSwitch>,
    pub interlockings: Vec<Interlocking>,
    /// Strategic trolley sections (interlockings, drawbridges) kept live when possible.
    pub keep_live: Vec<SectionId>,
}

impl TrackLayout {
    pub fn switch(&self, id: &SwitchId) -> Option<&TrackSwitch> {
        self.switches.iter().find(|s| &s.id == id)
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectionKind::Trolley => "trolley",
            SectionKind::Feeder => "feeder",
            SectionKind::SupplyTap => "supply_tap",
            SectionKind::SignalFeeder => "signal_feeder",
        })
    }
}

impl FromStr for SectionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "trolley" => SectionKind::Trolley,
            "feeder" => SectionKind::Feeder,
            "supply_tap" => SectionKind::SupplyTap,
            "signal_feeder" => SectionKind::SignalFeeder,
            other => return Err(format!("unknown section kind `{other}`")),
        })
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceKind::Breaker => "breaker",
            DeviceKind::Mod => "mod",
            DeviceKind::KnifeSwitch => "knife_switch",
            DeviceKind::Tie => "tie",
        })
    }
}

impl FromStr for DeviceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "breaker" => DeviceKind::Breaker,
            "mod" => DeviceKind::Mod,
            "knife_switch" | "knife" => DeviceKind::KnifeSwitch,
            "tie" => DeviceKind::Tie,
            other => return Err(format!("unknown device kind `{other}`")),
        })
    }
}

impl DeviceKind {
    /// Load-break capability implied by the kind, when it is not configurable.
    pub fn default_load_break(self) -> bool {
        matches!(self, DeviceKind::Breaker)
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::SupplySubstation => "supply",
            SourceKind::EqualizingSubstation => "equalizing",
        })
    }
}

impl FromStr for SourceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "supply" | "supply_substation" => SourceKind::SupplySubstation,
            "equalizing" | "equalizing_substation" => SourceKind::EqualizingSubstation,
            other => return Err(format!("unknown source kind `{other}`")),
        })
    }
}

impl fmt::Display for GroundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroundKind::Local => "local",
            GroundKind::Aerial => "aerial",
            GroundKind::Box => "box",
        })
    }
}

impl FromStr for GroundKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "local" => GroundKind::Local,
            "aerial" => GroundKind::Aerial,
            "box" => GroundKind::Box,
            other => return Err(format!("unknown ground kind `{other}`")),
        })
    }
}

/// Unvalidated collection of network records, each tagged with the document
/// line it came from (0 when built programmatically).
#[derive(Clone, Debug, Default)]
pub struct TopologyBuilder {
    pub(crate) zones: Vec<(ZoneId, usize)>,
    pub(crate) nodes: Vec<(ElectricalNode, usize)>,
    pub(crate) sections: Vec<(Section, usize)>,
    pub(crate) devices: Vec<(Device, usize)>,
    pub(crate) sources: Vec<(SourceId, SourceKind, NodeId, usize)>,
    pub(crate) grounds: Vec<(GroundPoint, usize)>,
    pub(crate) tracks: Vec<(TrackId, usize)>,
    pub(crate) switches: Vec<(TrackSwitch, usize)>,
    pub(crate) interlockings: Vec<(Interlocking, usize)>,
    pub(crate) keep_live: Vec<(SectionId, usize)>,
}

impl TopologyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zone(&mut self, id: impl Into<ZoneId>) -> &mut Self {
        self.zones.push((id.into(), 0));
        self
    }

    pub fn node(&mut self, id: impl Into<NodeId>, zone: impl Into<ZoneId>, location_ft: i64) -> &mut Self {
        self.nodes.push((
            ElectricalNode { id: id.into(), zone: zone.into(), location_ft },
            0,
        ));
        self
    }

    pub fn section(&mut self, section: Section) -> &mut Self {
        self.sections.push((section, 0));
        self
    }

    /// Shorthand for a trolley section; catenary count follows the default spacing.
    pub fn trolley(
        &mut self,
        id: impl Into<SectionId>,
        track: impl Into<TrackId>,
        a: impl Into<NodeId>,
        b: impl Into<NodeId>,
        start_ft: i64,
        end_ft: i64,
    ) -> &mut Self {
        self.section(Section {
            id: id.into(),
            kind: SectionKind::Trolley,
            track: Some(track.into()),
            group: None,
            endpoints: (a.into(), b.into()),
            start_ft,
            end_ft,
            catenary_count: ((end_ft - start_ft).max(0) / CATENARY_SPACING_FT) as u32,
        })
    }

    pub fn device(&mut self, device: Device) -> &mut Self {
        self.devices.push((device, 0));
        self
    }

    /// Shorthand for a device with the kind's default load-break rating.
    pub fn simple_device(
        &mut self,
        id: impl Into<DeviceId>,
        kind: DeviceKind,
        a: impl Into<NodeId>,
        b: impl Into<NodeId>,
    ) -> &mut Self {
        self.device(Device {
            id: id.into(),
            kind,
            terminals: (a.into(), b.into()),
            load_break: kind.default_load_break(),
            control: Control::Remote,
            travel_minutes: 0,
            rackable: false,
        })
    }

    pub fn source(&mut self, id: impl Into<SourceId>, kind: SourceKind, node: impl Into<NodeId>) -> &mut Self {
        self.sources.push((id.into(), kind, node.into(), 0));
        self
    }

    pub fn ground(&mut self, id: impl Into<GroundId>, kind: GroundKind, node: impl Into<NodeId>) -> &mut Self {
        self.grounds.push((GroundPoint { id: id.into(), node: node.into(), kind }, 0));
        self
    }

    pub fn track(&mut self, id: impl Into<TrackId>) -> &mut Self {
        self.tracks.push((id.into(), 0));
        self
    }

    pub fn track_switch(&mut self, sw: TrackSwitch) -> &mut Self {
        self.switches.push((sw, 0));
        self
    }

    pub fn interlocking(&mut self, il: Interlocking) -> &mut Self {
        self.interlockings.push((il, 0));
        self
    }

    pub fn keep_live(&mut self, id: impl Into<SectionId>) -> &mut Self {
        self.keep_live.push((id.into(), 0));
        self
    }

    /// Every invariant violation, in document order.
    pub fn validate(&self) -> Vec<ValidationIssue> {
        validate::validate(self)
    }

    pub fn build(&self) -> Result<NetworkTopology, Vec<ValidationIssue>> {
        let issues = self.validate();
        if !issues.is_empty() {
            return Err(issues);
        }
        Ok(NetworkTopology::assemble(self))
    }
}

/// Validated, immutable network model.
#[derive(Clone, Debug)]
pub struct NetworkTopology {
    zones: BTreeSet<ZoneId>,
    nodes: BTreeMap<NodeId, ElectricalNode>,
    sections: BTreeMap<SectionId, Section>,
    devices: BTreeMap<DeviceId, Device>,
    sources: BTreeMap<SourceId, Source>,
    grounds: BTreeMap<GroundId, GroundPoint>,
    layout: TrackLayout,
    plate_library: PlateLibrary,
    index: Index,
}

/// Dense integer view of the network used by the graph algorithms.
#[derive(Clone, Debug, Default)]
pub(crate) struct Index {
    pub node_ids: Vec<NodeId>,
    pub node_ix: HashMap<NodeId, usize>,
    /// (section id, a, b)
    pub section_edges: Vec<(SectionId, usize, usize)>,
    /// Device id → (a, b)
    pub device_ends: BTreeMap<DeviceId, (usize, usize)>,
    pub source_nodes: BTreeMap<SourceId, usize>,
    pub ground_nodes: BTreeMap<GroundId, usize>,
    pub node_group: Vec<LineGroup>,
}

impl NetworkTopology {
    fn assemble(b: &TopologyBuilder) -> Self {
        let zones: BTreeSet<ZoneId> = b.zones.iter().map(|(z, _)| z.clone()).collect();
        let nodes: BTreeMap<_, _> = b.nodes.iter().map(|(n, _)| (n.id.clone(), n.clone())).collect();
        let sections: BTreeMap<_, _> = b.sections.iter().map(|(s, _)| (s.id.clone(), s.clone())).collect();
        let devices: BTreeMap<_, _> = b.devices.iter().map(|(d, _)| (d.id.clone(), d.clone())).collect();
        let sources: BTreeMap<_, _> = b
            .sources
            .iter()
            .map(|(id, kind, node, _)| {
                let zone = nodes[node].zone.clone();
                (id.clone(), Source { id: id.clone(), node: node.clone(), kind: *kind, zone })
            })
            .collect();
        let grounds: BTreeMap<_, _> = b.grounds.iter().map(|(g, _)| (g.id.clone(), g.clone())).collect();
        let layout = TrackLayout {
            tracks: b.tracks.iter().map(|(t, _)| t.clone()).collect(),
            switches: b.switches.iter().map(|(s, _)| s.clone()).collect(),
            interlockings: b.interlockings.iter().map(|(i, _)| i.clone()).collect(),
            keep_live: b.keep_live.iter().map(|(k, _)| k.clone()).collect(),
        };
        let mut topo = NetworkTopology {
            zones,
            nodes,
            sections,
            devices,
            sources,
            grounds,
            layout,
            plate_library: PlateLibrary::default(),
            index: Index::default(),
        };
        topo.index = topo.build_index();
        topo
    }

    fn build_index(&self) -> Index {
        let node_ids: Vec<NodeId> = self.nodes.keys().cloned().collect();
        let node_ix: HashMap<NodeId, usize> =
            node_ids.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let section_edges = self
            .sections
            .values()
            .map(|s| (s.id.clone(), node_ix[&s.endpoints.0], node_ix[&s.endpoints.1]))
            .collect();
        let device_ends = self
            .devices
            .values()
            .map(|d| (d.id.clone(), (node_ix[&d.terminals.0], node_ix[&d.terminals.1])))
            .collect();
        let source_nodes = self.sources.values().map(|s| (s.id.clone(), node_ix[&s.node])).collect();
        let ground_nodes = self.grounds.values().map(|g| (g.id.clone(), node_ix[&g.node])).collect();
        let node_group = self.derive_line_groups(&node_ids, &node_ix);
        Index { node_ids, node_ix, section_edges, device_ends, source_nodes, ground_nodes, node_group }
    }

    /// Trolley nodes take their track; feeder nodes their feeder group. Nodes
    /// touched by neither inherit the smallest group among their neighbours.
    fn derive_line_groups(&self, node_ids: &[NodeId], node_ix: &HashMap<NodeId, usize>) -> Vec<LineGroup> {
        let n = node_ids.len();
        let mut direct: Vec<Option<LineGroup>> = vec![None; n];
        let mut feeder: Vec<Option<LineGroup>> = vec![None; n];
        for s in self.sections.values() {
            for end in [&s.endpoints.0, &s.endpoints.1] {
                let i = node_ix[end];
                match (&s.kind, &s.track) {
                    (SectionKind::Trolley, Some(t)) => {
                        let g = LineGroup::new(t.as_str());
                        if direct[i].as_ref().is_none_or(|cur| &g < cur) {
                            direct[i] = Some(g);
                        }
                    }
                    (SectionKind::Feeder | SectionKind::SignalFeeder, _) => {
                        let g = s.group.clone().unwrap_or_else(|| LineGroup::new("feeder"));
                        if feeder[i].as_ref().is_none_or(|cur| &g < cur) {
                            feeder[i] = Some(g);
                        }
                    }
                    (SectionKind::SupplyTap, _) => {
                        if let Some(g) = &s.group {
                            if feeder[i].as_ref().is_none_or(|cur| g < cur) {
                                feeder[i] = Some(g.clone());
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut group: Vec<Option<LineGroup>> =
            (0..n).map(|i| direct[i].clone().or_else(|| feeder[i].clone())).collect();

        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in self.sections.values() {
            let (a, b) = (node_ix[&s.endpoints.0], node_ix[&s.endpoints.1]);
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        for d in self.devices.values() {
            let (a, b) = (node_ix[&d.terminals.0], node_ix[&d.terminals.1]);
            neighbours[a].push(b);
            neighbours[b].push(a);
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                if group[i].is_some() {
                    continue;
                }
                let best = neighbours[i].iter().filter_map(|&j| group[j].clone()).min();
                if best.is_some() {
                    group[i] = best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        group.into_iter().map(|g| g.unwrap_or_else(|| LineGroup::new("network"))).collect()
    }

    /// Recover the records this topology was built from, for re-validation.
    pub fn to_builder(&self) -> TopologyBuilder {
        let mut b = TopologyBuilder::new();
        for z in &self.zones {
            b.zone(z.clone());
        }
        for n in self.nodes.values() {
            b.nodes.push((n.clone(), 0));
        }
        for s in self.sections.values() {
            b.section(s.clone());
        }
        for d in self.devices.values() {
            b.device(d.clone());
        }
        for s in self.sources.values() {
            b.source(s.id.clone(), s.kind, s.node.clone());
        }
        for g in self.grounds.values() {
            b.grounds.push((g.clone(), 0));
        }
        for t in &self.layout.tracks {
            b.track(t.clone());
        }
        for s in &self.layout.switches {
            b.track_switch(s.clone());
        }
        for i in &self.layout.interlockings {
            b.interlocking(i.clone());
        }
        for k in &self.layout.keep_live {
            b.keep_live(k.clone());
        }
        b
    }

    /// Attach a plate order library after checking it against the track layout.
    pub fn with_plate_library(mut self, library: PlateLibrary) -> Result<Self, Vec<ValidationIssue>> {
        let issues = library.validate(&self.layout);
        if !issues.is_empty() {
            return Err(issues);
        }
        self.plate_library = library;
        Ok(self)
    }

    pub fn zones(&self) -> &BTreeSet<ZoneId> {
        &self.zones
    }
    pub fn nodes(&self) -> &BTreeMap<NodeId, ElectricalNode> {
        &self.nodes
    }
    pub fn sections(&self) -> &BTreeMap<SectionId, Section> {
        &self.sections
    }
    pub fn devices(&self) -> &BTreeMap<DeviceId, Device> {
        &self.devices
    }
    pub fn sources(&self) -> &BTreeMap<SourceId, Source> {
        &self.sources
    }
    pub fn ground_points(&self) -> &BTreeMap<GroundId, GroundPoint> {
        &self.grounds
    }
    pub fn track_layout(&self) -> &TrackLayout {
        &self.layout
    }
    pub fn plate_library(&self) -> &PlateLibrary {
        &self.plate_library
    }

    pub fn node(&self, id: &str) -> Option<&ElectricalNode> {
        self.nodes.get(id)
    }
    pub fn section(&self, id: &str) -> Option<&Section> {
        self.sections.get(id)
    }
    pub fn device(&self, id: &str) -> Option<&Device> {
        self.devices.get(id)
    }
    pub fn ground_point(&self, id: &str) -> Option<&GroundPoint> {
        self.grounds.get(id)
    }

    pub(crate) fn index(&self) -> &Index {
        &self.index
    }

    /// Line group (track or feeder group) a node belongs to.
    pub fn node_line_group(&self, node: &NodeId) -> Option<&LineGroup> {
        self.index.node_ix.get(node).map(|&i| &self.index.node_group[i])
    }

    /// Devices are filed under the line group of a terminal that is not a
    /// source bus, preferring the first terminal.
    pub fn device_line_group(&self, device: &DeviceId) -> Option<LineGroup> {
        let d = self.devices.get(device)?;
        let source_nodes: BTreeSet<&NodeId> = self.sources.values().map(|s| &s.node).collect();
        let pick = if source_nodes.contains(&d.terminals.0) && !source_nodes.contains(&d.terminals.1) {
            &d.terminals.1
        } else {
            &d.terminals.0
        };
        self.node_line_group(pick).cloned()
    }

    pub fn ground_line_group(&self, ground: &GroundId) -> Option<LineGroup> {
        let g = self.grounds.get(ground)?;
        self.node_line_group(&g.node).cloned()
    }

    /// Whether a device joins two different phase zones.
    pub fn crosses_zones(&self, device: &DeviceId) -> bool {
        self.devices
            .get(device)
            .map(|d| self.nodes[&d.terminals.0].zone != self.nodes[&d.terminals.1].zone)
            .unwrap_or(false)
    }

    pub fn summary(&self) -> TopologySummary {
        let count_sections = |k: SectionKind| self.sections.values().filter(|s| s.kind == k).count();
        let count_sources = |k: SourceKind| self.sources.values().filter(|s| s.kind == k).count();
        let mut devices_by_kind = BTreeMap::new();
        for d in self.devices.values() {
            *devices_by_kind.entry(d.kind).or_insert(0) += 1;
        }
        TopologySummary {
            zones: self.zones.len(),
            nodes: self.nodes.len(),
            tracks: self.layout.tracks.len(),
            trolley_sections: count_sections(SectionKind::Trolley),
            feeder_sections: count_sections(SectionKind::Feeder),
            supply_tap_sections: count_sections(SectionKind::SupplyTap),
            signal_feeder_sections: count_sections(SectionKind::SignalFeeder),
            feeder_groups: self
                .sections
                .values()
                .filter(|s| s.kind == SectionKind::Feeder)
                .map(|s| s.group.clone().unwrap_or_else(|| LineGroup::new("feeder")))
                .collect::<BTreeSet<_>>()
                .len(),
            devices_by_kind,
            supply_substations: count_sources(SourceKind::SupplySubstation),
            equalizing_substations: count_sources(SourceKind::EqualizingSubstation),
            ground_points: self.grounds.len(),
            switches: self.layout.switches.len(),
            interlockings: self.layout.interlockings.len(),
            keep_live_assets: self.layout.keep_live.len(),
            plate_orders: self.plate_library.len(),
            extent_ft: self
                .sections
                .values()
                .map(|s| (s.start_ft, s.end_ft))
                .fold(None, |acc: Option<(i64, i64)>, (a, b)| match acc {
                    None => Some((a, b)),
                    Some((lo, hi)) => Some((lo.min(a), hi.max(b))),
                })
                .map(|(lo, hi)| hi - lo)
                .unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologySummary {
    pub zones: usize,
    pub nodes: usize,
    pub tracks: usize,
    pub trolley_sections: usize,
    pub feeder_sections: usize,
    pub supply_tap_sections: usize,
    pub signal_feeder_sections: usize,
    pub feeder_groups: usize,
    pub devices_by_kind: BTreeMap<DeviceKind, usize>,
    pub supply_substations: usize,
    pub equalizing_substations: usize,
    pub ground_points: usize,
    pub switches: usize,
    pub interlockings: usize,
    pub keep_live_assets: usize,
    pub plate_orders: usize,
    pub extent_ft: i64,
}

impl fmt::Display for TopologySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "phase zones:            {}", self.zones)?;
        writeln!(f, "nodes:                  {}", self.nodes)?;
        writeln!(f, "tracks:                 {}", self.tracks)?;
        writeln!(f, "trolley sections:       {}", self.trolley_sections)?;
        writeln!(f, "feeder sections:        {} in {} group(s)", self.feeder_sections, self.feeder_groups)?;
        writeln!(f, "supply tap sections:    {}", self.supply_tap_sections)?;
        writeln!(f, "signal feeder sections: {}", self.signal_feeder_sections)?;
        let devices: Vec<String> = self.devices_by_kind.iter().map(|(k, n)| format!("{n} {k}")).collect();
        writeln!(f, "devices:                {}", if devices.is_empty() { "none".into() } else { devices.join(", ") })?;
        writeln!(f, "supply substations:     {}", self.supply_substations)?;
        writeln!(f, "equalizing substations: {}", self.equalizing_substations)?;
        writeln!(f, "ground points:          {}", self.ground_points)?;
        writeln!(f, "track switches:         {}", self.switches)?;
        writeln!(f, "interlockings:          {}", self.interlockings)?;
        writeln!(f, "keep-live assets:       {}", self.keep_live_assets)?;
        writeln!(f, "plate orders:           {}", self.plate_orders)?;
        write!(f, "extent:                 {} ft ({:.1} mi)", self.extent_ft, self.extent_ft as f64 / 5280.0)
    }
}
