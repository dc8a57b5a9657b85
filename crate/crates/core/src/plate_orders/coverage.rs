use std::fmt;

use super::{PlateLibrary, PlateOrder};
use crate::ids::*;
use crate::switching::IsolationRequest;
use crate::topology::{NetworkTopology, SectionKind};

/// An uncovered stretch of a target trolley section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gap {
    pub section: SectionId,
    pub track: TrackId,
    pub start_ft: i64,
    pub end_ft: i64,
}

impl Gap {
    pub fn length_ft(&self) -> i64 {
        self.end_ft - self.start_ft
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coverage {
    Covered,
    Gaps(Vec<Gap>),
}

impl Coverage {
    pub fn is_covered(&self) -> bool {
        matches!(self, Coverage::Covered)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PlateError {
    #[error("NO_PLATE_ORDER: no plate order covers request {request}")]
    NoPlateOrder { request: RequestId },
    #[error("plate order library is empty")]
    EmptyLibrary,
    #[error("unknown plate order `{0}`")]
    UnknownPlateOrder(String),
}

impl PlateError {
    pub fn code(&self) -> &'static str {
        match self {
            PlateError::NoPlateOrder { .. } => "NO_PLATE_ORDER",
            PlateError::EmptyLibrary => "EMPTY_LIBRARY",
            PlateError::UnknownPlateOrder(_) => "UNKNOWN_PLATE_ORDER",
        }
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} track {} {}..{} ({} ft)", self.section, self.track, self.start_ft, self.end_ft, self.length_ft())
    }
}

/// Every target trolley section, widened by `margin_ft` on both ends, must lie
/// inside the union of the order's barred intervals on its track.
pub fn coverage_check(
    topology: &NetworkTopology,
    plate_order: &PlateOrder,
    request: &IsolationRequest,
    margin_ft: i64,
) -> Coverage {
    let layout = topology.track_layout();
    let mut gaps = Vec::new();
    for sid in &request.target_sections {
        let Some(section) = topology.section(sid.as_str()) else { continue };
        if section.kind != SectionKind::Trolley {
            continue;
        }
        let track = section.track.clone().expect("trolley section has a track");
        let mut bars: Vec<(i64, i64)> = plate_order
            .barred_intervals(layout)
            .filter(|(t, _, _)| **t == track)
            .map(|(_, lo, hi)| (lo, hi))
            .collect();
        bars.sort();
        // Walk the required span left to right, consuming barred intervals.
        let (mut cursor, end) = (section.start_ft - margin_ft, section.end_ft + margin_ft);
        for (lo, hi) in bars {
            if cursor >= end {
                break;
            }
            if hi <= cursor {
                continue;
            }
            if lo > cursor {
                gaps.push(Gap { section: sid.clone(), track: track.clone(), start_ft: cursor, end_ft: lo.min(end) });
            }
            cursor = cursor.max(hi);
        }
        if cursor < end {
            gaps.push(Gap { section: sid.clone(), track: track.clone(), start_ft: cursor, end_ft: end });
        }
    }
    if gaps.is_empty() {
        Coverage::Covered
    } else {
        Coverage::Gaps(gaps)
    }
}

/// The covering order with the fewest barred track-feet; ties go to the
/// smaller id.
pub fn select_plate_order<'a>(
    library: &'a PlateLibrary,
    topology: &NetworkTopology,
    request: &IsolationRequest,
    margin_ft: i64,
) -> Result<&'a PlateOrder, PlateError> {
    if library.is_empty() {
        return Err(PlateError::EmptyLibrary);
    }
    let layout = topology.track_layout();
    library
        .iter()
        .filter(|o| coverage_check(topology, o, request, margin_ft).is_covered())
        .min_by(|a, b| a.barred_track_feet(layout).cmp(&b.barred_track_feet(layout)).then(a.id.cmp(&b.id)))
        .ok_or_else(|| PlateError::NoPlateOrder { request: request.id.clone() })
}
