//! Plate orders: published sets of barred track segments and blocked
//! switches that protect an isolation from electric trains, plus the POPS
//! request/acknowledge handshake between Power Director and Dispatcher.
//!
//! Library file format:
//!
//! ```text
//! plate <id> "<description>"
//! bar <track> <from_switch> <to_switch>
//! block <switch>
//! ```
//!
//! `bar` and `block` lines belong to the most recent `plate`.

mod coverage;
mod pops;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::ids::*;
use crate::records::{parse_records, quote, DocumentError, Record};
use crate::topology::{IssueKind, TrackLayout, ValidationIssue};

pub use coverage::{coverage_check, select_plate_order, Coverage, Gap, PlateError};
pub use pops::{next_state, pops_transition, PopsError, PopsEvent, PopsSession, PopsState, PopsTransition, Role};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BarredSegment {
    pub track: TrackId,
    pub from_switch: SwitchId,
    pub to_switch: SwitchId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlateOrder {
    pub id: PlateOrderId,
    pub barred_segments: Vec<BarredSegment>,
    pub blocked_switches: BTreeSet<SwitchId>,
    pub description: String,
}

impl PlateOrder {
    /// Stationing interval of each barred segment, resolved through the layout.
    pub fn barred_intervals<'a>(&'a self, layout: &'a TrackLayout) -> impl Iterator<Item = (&'a TrackId, i64, i64)> + 'a {
        self.barred_segments.iter().filter_map(move |seg| {
            let a = layout.switch(&seg.from_switch)?.location_ft;
            let b = layout.switch(&seg.to_switch)?.location_ft;
            Some((&seg.track, a.min(b), a.max(b)))
        })
    }

    /// Total barred track-feet.
    pub fn barred_track_feet(&self, layout: &TrackLayout) -> i64 {
        self.barred_intervals(layout).map(|(_, lo, hi)| hi - lo).sum()
    }

    /// Whether a movement over `[from_ft, to_ft]` on `track` touches a barred segment.
    pub fn bars(&self, layout: &TrackLayout, track: &TrackId, from_ft: i64, to_ft: i64) -> bool {
        let (lo, hi) = (from_ft.min(to_ft), from_ft.max(to_ft));
        self.barred_intervals(layout).any(|(t, a, b)| t == track && lo <= b && hi >= a)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlateLibrary {
    orders: BTreeMap<PlateOrderId, PlateOrder>,
}

impl PlateLibrary {
    pub fn new(orders: impl IntoIterator<Item = PlateOrder>) -> Self {
        Self { orders: orders.into_iter().map(|o| (o.id.clone(), o)).collect() }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&PlateOrder> {
        self.orders.get(id)
    }

    /// Orders in id order.
    pub fn iter(&self) -> impl Iterator<Item = &PlateOrder> {
        self.orders.values()
    }

    pub fn insert(&mut self, order: PlateOrder) {
        self.orders.insert(order.id.clone(), order);
    }

    pub fn validate(&self, layout: &TrackLayout) -> Vec<ValidationIssue> {
        let mut out = Vec::new();
        for order in self.orders.values() {
            for seg in &order.barred_segments {
                if !layout.tracks.contains(&seg.track) {
                    out.push(ValidationIssue::new(
                        IssueKind::DanglingReference,
                        0,
                        vec![order.id.to_string(), seg.track.to_string()],
                        "plate order bars an unknown track",
                    ));
                }
                for sw in [&seg.from_switch, &seg.to_switch] {
                    match layout.switch(sw) {
                        None => out.push(ValidationIssue::new(
                            IssueKind::DanglingReference,
                            0,
                            vec![order.id.to_string(), sw.to_string()],
                            "plate order references an unknown switch",
                        )),
                        Some(s) if !s.serves(&seg.track) => out.push(ValidationIssue::new(
                            IssueKind::PlateOrderLimits,
                            0,
                            vec![order.id.to_string(), sw.to_string()],
                            format!("switch is not on track {}", seg.track),
                        )),
                        Some(_) => {}
                    }
                }
            }
            let intervals: Vec<_> = order.barred_intervals(layout).collect();
            for sw in &order.blocked_switches {
                let Some(s) = layout.switch(sw) else {
                    out.push(ValidationIssue::new(
                        IssueKind::DanglingReference,
                        0,
                        vec![order.id.to_string(), sw.to_string()],
                        "plate order blocks an unknown switch",
                    ));
                    continue;
                };
                let inside = intervals
                    .iter()
                    .any(|(t, lo, hi)| s.serves(t) && *lo <= s.location_ft && s.location_ft <= *hi);
                if !inside {
                    out.push(ValidationIssue::new(
                        IssueKind::PlateOrderLimits,
                        0,
                        vec![order.id.to_string(), sw.to_string()],
                        "blocked switch lies outside every barred segment",
                    ));
                }
            }
        }
        out
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for o in self.orders.values() {
            let _ = writeln!(out, "plate {} {}", o.id, quote(&o.description));
            for seg in &o.barred_segments {
                let _ = writeln!(out, "bar {} {} {}", seg.track, seg.from_switch, seg.to_switch);
            }
            for sw in &o.blocked_switches {
                let _ = writeln!(out, "block {sw}");
            }
        }
        out
    }
}

pub fn parse_plate_library(text: &str) -> Result<PlateLibrary, DocumentError> {
    library_from_records(&parse_records(text)?)
}

pub(crate) fn library_from_records(records: &[Record]) -> Result<PlateLibrary, DocumentError> {
    let mut orders: Vec<PlateOrder> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in records {
        match r.keyword.as_str() {
            "plate" => {
                r.expect_arity(1, 2)?;
                let id = PlateOrderId::new(r.arg(0, "plate id")?);
                if !seen.insert(id.clone()) {
                    return Err(DocumentError::new(r.line, format!("duplicate plate order `{id}`")));
                }
                orders.push(PlateOrder {
                    id,
                    barred_segments: Vec::new(),
                    blocked_switches: BTreeSet::new(),
                    description: r.positional.get(1).cloned().unwrap_or_default(),
                });
            }
            "bar" => {
                r.expect_arity(3, 3)?;
                let cur = orders
                    .last_mut()
                    .ok_or_else(|| DocumentError::new(r.line, "`bar` before any `plate`"))?;
                cur.barred_segments.push(BarredSegment {
                    track: TrackId::new(r.arg(0, "track")?),
                    from_switch: SwitchId::new(r.arg(1, "from switch")?),
                    to_switch: SwitchId::new(r.arg(2, "to switch")?),
                });
            }
            "block" => {
                r.expect_arity(1, 1)?;
                let cur = orders
                    .last_mut()
                    .ok_or_else(|| DocumentError::new(r.line, "`block` before any `plate`"))?;
                cur.blocked_switches.insert(SwitchId::new(r.arg(0, "switch")?));
            }
            other => return Err(DocumentError::new(r.line, format!("unknown plate record `{other}`"))),
        }
    }
    Ok(PlateLibrary::new(orders))
}
