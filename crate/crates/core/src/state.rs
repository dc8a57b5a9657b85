//! Mutable runtime switching state and its document format.
//!
//! ```text
//! position <device> open|closed|racked_out
//! ground <ground_point>
//! out_of_service <source>
//! tag <device-or-ground> <authority> "<reason>" [at=<seconds>]
//! bridge <nodeA> <nodeB>
//! ```
//!
//! Anything not mentioned keeps its normal condition: breakers, MODs and
//! knife switches closed, ties open, every source in service.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::ids::*;
use crate::records::{parse_records, quote, DocumentError};
use crate::topology::{DeviceKind, NetworkTopology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Open,
    Closed,
    /// Withdrawn from its cubicle; always electrically open.
    RackedOut,
}

impl Position {
    pub fn is_closed(self) -> bool {
        self == Position::Closed
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Position::Open => "open",
            Position::Closed => "closed",
            Position::RackedOut => "racked_out",
        })
    }
}

impl FromStr for Position {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "open" => Position::Open,
            "closed" => Position::Closed,
            "racked_out" => Position::RackedOut,
            other => return Err(format!("unknown position `{other}`")),
        })
    }
}

/// Lockout tag hung on a device or ground point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub authority: PersonId,
    pub reason: String,
    /// Simulation seconds.
    pub timestamp: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SwitchingState {
    pub positions: BTreeMap<DeviceId, Position>,
    pub applied_grounds: BTreeSet<GroundId>,
    pub sources_in_service: BTreeSet<SourceId>,
    /// Keyed by device or ground point id.
    pub tags: BTreeMap<String, Tag>,
    /// Node pairs electrically joined by a multi-pantograph train.
    pub pantograph_bridges: BTreeSet<(NodeId, NodeId)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("state references unknown {kind} `{id}`")]
    UnknownId { kind: &'static str, id: String },
    #[error("{0}")]
    Document(#[from] DocumentError),
}

impl SwitchingState {
    /// Normal operating condition: ties open, every other device closed,
    /// all sources in service.
    pub fn normal(topology: &NetworkTopology) -> Self {
        let positions = topology
            .devices()
            .values()
            .map(|d| {
                let p = if d.kind == DeviceKind::Tie { Position::Open } else { Position::Closed };
                (d.id.clone(), p)
            })
            .collect();
        Self {
            positions,
            applied_grounds: BTreeSet::new(),
            sources_in_service: topology.sources().keys().cloned().collect(),
            tags: BTreeMap::new(),
            pantograph_bridges: BTreeSet::new(),
        }
    }

    pub fn position(&self, device: &DeviceId) -> Position {
        self.positions.get(device).copied().unwrap_or(Position::Open)
    }

    pub fn set_position(&mut self, device: DeviceId, position: Position) {
        self.positions.insert(device, position);
    }

    /// Check every id against the topology.
    pub fn check(&self, topology: &NetworkTopology) -> Result<(), StateError> {
        let unknown = |kind, id: &str| StateError::UnknownId { kind, id: id.to_owned() };
        for d in self.positions.keys() {
            if topology.device(d.as_str()).is_none() {
                return Err(unknown("device", d.as_str()));
            }
        }
        for g in &self.applied_grounds {
            if topology.ground_point(g.as_str()).is_none() {
                return Err(unknown("ground point", g.as_str()));
            }
        }
        for s in &self.sources_in_service {
            if !topology.sources().contains_key(s.as_str()) {
                return Err(unknown("source", s.as_str()));
            }
        }
        for t in self.tags.keys() {
            if topology.device(t).is_none() && topology.ground_point(t).is_none() {
                return Err(unknown("tag target", t));
            }
        }
        for (a, b) in &self.pantograph_bridges {
            for n in [a, b] {
                if topology.node(n.as_str()).is_none() {
                    return Err(unknown("node", n.as_str()));
                }
            }
        }
        Ok(())
    }

    /// Positions, grounds and tags: the parts restoration must return exactly.
    pub fn restorable_view(&self) -> (&BTreeMap<DeviceId, Position>, &BTreeSet<GroundId>, &BTreeMap<String, Tag>) {
        (&self.positions, &self.applied_grounds, &self.tags)
    }

    pub fn from_document(topology: &NetworkTopology, text: &str) -> Result<Self, StateError> {
        let mut state = Self::normal(topology);
        for r in parse_records(text)? {
            match r.keyword.as_str() {
                "position" => {
                    r.expect_arity(2, 2)?;
                    let id = DeviceId::new(r.arg(0, "device")?);
                    state.positions.insert(id, r.parse_arg(1, "position")?);
                }
                "ground" => {
                    r.expect_arity(1, 1)?;
                    state.applied_grounds.insert(GroundId::new(r.arg(0, "ground point")?));
                }
                "out_of_service" => {
                    r.expect_arity(1, 1)?;
                    state.sources_in_service.remove(r.arg(0, "source")?);
                }
                "in_service" => {
                    r.expect_arity(1, 1)?;
                    state.sources_in_service.insert(SourceId::new(r.arg(0, "source")?));
                }
                "tag" => {
                    r.expect_arity(3, 3)?;
                    state.tags.insert(
                        r.arg(0, "target")?.to_owned(),
                        Tag {
                            authority: PersonId::new(r.arg(1, "authority")?),
                            reason: r.arg(2, "reason")?.to_owned(),
                            timestamp: r.opt("at")?.unwrap_or(0),
                        },
                    );
                }
                "bridge" => {
                    r.expect_arity(2, 2)?;
                    let (a, b) = (NodeId::new(r.arg(0, "node A")?), NodeId::new(r.arg(1, "node B")?));
                    state.pantograph_bridges.insert(if a <= b { (a, b) } else { (b, a) });
                }
                other => {
                    return Err(DocumentError::new(r.line, format!("unknown state record `{other}`")).into());
                }
            }
        }
        state.check(topology)?;
        Ok(state)
    }

    /// Full state document; every device position is written explicitly.
    pub fn to_document(&self, topology: &NetworkTopology) -> String {
        let mut out = String::new();
        for (d, p) in &self.positions {
            let _ = writeln!(out, "position {d} {p}");
        }
        for g in &self.applied_grounds {
            let _ = writeln!(out, "ground {g}");
        }
        for s in topology.sources().keys() {
            if !self.sources_in_service.contains(s) {
                let _ = writeln!(out, "out_of_service {s}");
            }
        }
        for (t, tag) in &self.tags {
            let _ = writeln!(out, "tag {t} {} {} at={}", tag.authority, quote(&tag.reason), tag.timestamp);
        }
        for (a, b) in &self.pantograph_bridges {
            let _ = writeln!(out, "bridge {a} {b}");
        }
        out
    }
}
