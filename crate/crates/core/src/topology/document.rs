use std::fmt::Write as _;

use super::*;
use crate::plate_orders::{self, PlateLibrary};
use crate::records::{parse_records, DocumentError, Record};

/// Failure to turn a network document into a topology.
#[derive(Clone, Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{0}")]
    Syntax(#[from] DocumentError),
    #[error("{} validation error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<ValidationIssue>),
}

impl LoadError {
    pub fn issues(&self) -> &[ValidationIssue] {
        match self {
            LoadError::Invalid(v) => v,
            LoadError::Syntax(_) => &[],
        }
    }
}

const PLATE_KEYWORDS: [&str; 3] = ["plate", "bar", "block"];

/// Parse a network document into an unvalidated builder. Plate order records
/// embedded in the document are returned separately.
pub fn parse_network(text: &str) -> Result<(TopologyBuilder, PlateLibrary), DocumentError> {
    let records = parse_records(text)?;
    let (plates, network): (Vec<Record>, Vec<Record>) =
        records.into_iter().partition(|r| PLATE_KEYWORDS.contains(&r.keyword.as_str()));
    let mut b = TopologyBuilder::new();
    for r in &network {
        parse_record(&mut b, r)?;
    }
    let library = plate_orders::library_from_records(&plates)?;
    Ok((b, library))
}

/// Parse and validate a network document.
pub fn load_topology(text: &str) -> Result<NetworkTopology, LoadError> {
    let (builder, library) = parse_network(text)?;
    let topo = builder.build().map_err(LoadError::Invalid)?;
    topo.with_plate_library(library).map_err(LoadError::Invalid)
}

fn parse_record(b: &mut TopologyBuilder, r: &Record) -> Result<(), DocumentError> {
    let line = r.line;
    match r.keyword.as_str() {
        "zone" => {
            r.expect_arity(1, 1)?;
            r.reject_unknown_options(&[])?;
            b.zones.push((ZoneId::new(r.arg(0, "zone id")?), line));
        }
        "node" => {
            r.expect_arity(3, 3)?;
            r.reject_unknown_options(&[])?;
            b.nodes.push((
                ElectricalNode {
                    id: NodeId::new(r.arg(0, "node id")?),
                    zone: ZoneId::new(r.arg(1, "zone")?),
                    location_ft: r.parse_arg(2, "stationing")?,
                },
                line,
            ));
        }
        "section" => {
            r.expect_arity(6, 6)?;
            r.reject_unknown_options(&["track", "cats", "group"])?;
            let kind: SectionKind = r.parse_arg(1, "section kind")?;
            let start_ft: i64 = r.parse_arg(4, "start stationing")?;
            let end_ft: i64 = r.parse_arg(5, "end stationing")?;
            let cats: Option<u32> = r.opt("cats")?;
            let default_cats = if kind == SectionKind::Trolley {
                ((end_ft - start_ft).max(0) / CATENARY_SPACING_FT) as u32
            } else {
                0
            };
            b.sections.push((
                Section {
                    id: SectionId::new(r.arg(0, "section id")?),
                    kind,
                    track: r.options.get("track").map(|t| TrackId::new(t.as_str())),
                    group: r.options.get("group").map(|g| LineGroup::new(g.as_str())),
                    endpoints: (NodeId::new(r.arg(2, "node A")?), NodeId::new(r.arg(3, "node B")?)),
                    start_ft,
                    end_ft,
                    catenary_count: cats.unwrap_or(default_cats),
                },
                line,
            ));
        }
        "device" => {
            r.expect_arity(4, 4)?;
            r.reject_unknown_options(&["control", "travel", "loadbreak", "rackable"])?;
            let kind: DeviceKind = r.parse_arg(1, "device kind")?;
            let control = match r.options.get("control").map(String::as_str) {
                None | Some("remote") => Control::Remote,
                Some("manual") => Control::Manual,
                Some(other) => return Err(DocumentError::new(line, format!("bad control=`{other}`"))),
            };
            b.devices.push((
                Device {
                    id: DeviceId::new(r.arg(0, "device id")?),
                    kind,
                    terminals: (NodeId::new(r.arg(2, "node A")?), NodeId::new(r.arg(3, "node B")?)),
                    load_break: r.flag("loadbreak")?.unwrap_or(kind.default_load_break()),
                    control,
                    travel_minutes: r.opt("travel")?.unwrap_or(0),
                    rackable: r.flag("rackable")?.unwrap_or(false),
                },
                line,
            ));
        }
        "source" => {
            r.expect_arity(3, 3)?;
            r.reject_unknown_options(&[])?;
            b.sources.push((
                SourceId::new(r.arg(0, "source id")?),
                r.parse_arg(1, "source kind")?,
                NodeId::new(r.arg(2, "node")?),
                line,
            ));
        }
        "ground" => {
            r.expect_arity(3, 3)?;
            r.reject_unknown_options(&[])?;
            b.grounds.push((
                GroundPoint {
                    id: GroundId::new(r.arg(0, "ground id")?),
                    kind: r.parse_arg(1, "ground kind")?,
                    node: NodeId::new(r.arg(2, "node")?),
                },
                line,
            ));
        }
        "track" => {
            r.expect_arity(1, 1)?;
            r.reject_unknown_options(&[])?;
            b.tracks.push((TrackId::new(r.arg(0, "track id")?), line));
        }
        "switch" => {
            r.expect_arity(3, 3)?;
            r.reject_unknown_options(&[])?;
            let pair = r.arg(1, "track pair")?;
            let (a, c) = pair
                .split_once(':')
                .ok_or_else(|| DocumentError::new(line, format!("track pair `{pair}` must be <trackA>:<trackB>")))?;
            b.switches.push((
                TrackSwitch {
                    id: SwitchId::new(r.arg(0, "switch id")?),
                    tracks: (TrackId::new(a), TrackId::new(c)),
                    location_ft: r.parse_arg(2, "stationing")?,
                },
                line,
            ));
        }
        "interlocking" => {
            r.expect_arity(3, 3)?;
            r.reject_unknown_options(&["switches"])?;
            let switches = r
                .options
                .get("switches")
                .map(|csv| csv.split(',').filter(|s| !s.is_empty()).map(SwitchId::new).collect())
                .unwrap_or_default();
            b.interlockings.push((
                Interlocking {
                    id: InterlockingId::new(r.arg(0, "interlocking id")?),
                    start_ft: r.parse_arg(1, "start stationing")?,
                    end_ft: r.parse_arg(2, "end stationing")?,
                    switches,
                },
                line,
            ));
        }
        "keeplive" => {
            r.expect_arity(1, 1)?;
            r.reject_unknown_options(&[])?;
            b.keep_live.push((SectionId::new(r.arg(0, "section id")?), line));
        }
        other => return Err(DocumentError::new(line, format!("unknown record `{other}`"))),
    }
    Ok(())
}

impl NetworkTopology {
    /// Render the topology (and its plate order library) as a network document.
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for z in &self.zones {
            let _ = writeln!(out, "zone {z}");
        }
        for t in &self.layout.tracks {
            let _ = writeln!(out, "track {t}");
        }
        for n in self.nodes.values() {
            let _ = writeln!(out, "node {} {} {}", n.id, n.zone, n.location_ft);
        }
        for s in self.sections.values() {
            let _ = write!(out, "section {} {}", s.id, s.kind);
            if let Some(t) = &s.track {
                let _ = write!(out, " track={t}");
            }
            let _ = write!(out, " {} {} {} {}", s.endpoints.0, s.endpoints.1, s.start_ft, s.end_ft);
            if s.kind == SectionKind::Trolley {
                let _ = write!(out, " cats={}", s.catenary_count);
            }
            if let Some(g) = &s.group {
                let _ = write!(out, " group={g}");
            }
            out.push('\n');
        }
        for d in self.devices.values() {
            let _ = writeln!(
                out,
                "device {} {} {} {} control={} travel={} loadbreak={} rackable={}",
                d.id,
                d.kind,
                d.terminals.0,
                d.terminals.1,
                match d.control {
                    Control::Remote => "remote",
                    Control::Manual => "manual",
                },
                d.travel_minutes,
                d.load_break as u8,
                d.rackable as u8
            );
        }
        for s in self.sources.values() {
            let _ = writeln!(out, "source {} {} {}", s.id, s.kind, s.node);
        }
        for g in self.grounds.values() {
            let _ = writeln!(out, "ground {} {} {}", g.id, g.kind, g.node);
        }
        for s in &self.layout.switches {
            let _ = writeln!(out, "switch {} {}:{} {}", s.id, s.tracks.0, s.tracks.1, s.location_ft);
        }
        for i in &self.layout.interlockings {
            let sw: Vec<&str> = i.switches.iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, "interlocking {} {} {} switches={}", i.id, i.start_ft, i.end_ft, sw.join(","));
        }
        for k in &self.layout.keep_live {
            let _ = writeln!(out, "keeplive {k}");
        }
        out.push_str(&self.plate_library.to_document());
        out
    }
}
