//! Binding-craft analysis: which craft limits the week.

use std::collections::BTreeSet;

use super::{Craft, Crew, JobBook, ResourceCalendar};
use crate::ids::Night;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CapacityReport {
    pub night: Night,
    pub availability: Crew,
    pub demand: Crew,
    /// Crafts attaining the minimum availability/demand ratio; crafts with
    /// zero demand are never binding.
    pub binding: Vec<Craft>,
}

/// Crafts minimising `available / demand` over crafts with nonzero demand,
/// compared exactly by cross-multiplication.
pub fn binding_crafts(available: &Crew, demand: &Crew) -> Vec<Craft> {
    let mut best: Option<(u64, u64)> = None;
    let mut out = Vec::new();
    for c in Craft::ALL {
        let (a, d) = (available[c] as u64, demand[c] as u64);
        if d == 0 {
            continue;
        }
        match best {
            Some((ba, bd)) if a * bd > ba * d => {}
            Some((ba, bd)) if a * bd == ba * d => out.push(c),
            _ => {
                best = Some((a, d));
                out.clear();
                out.push(c);
            }
        }
    }
    out
}

/// Total demand of every job submitted for `night` (each job at its A
/// variant, each shared isolation's overhead once) against the night's
/// availability.
pub fn effective_capacity(calendar: &ResourceCalendar, night: &Night, jobs: &JobBook) -> CapacityReport {
    let mut demand = Crew::default();
    let mut isolations = BTreeSet::new();
    for job in jobs.jobs.iter().filter(|j| j.nights.contains(night)) {
        let Some(a) = job.variants.first() else { continue };
        demand += a.demand;
        if let Some(req) = &a.isolation {
            if isolations.insert(req.clone()) {
                demand += jobs.isolation_overhead.get(req).copied().unwrap_or_default();
            }
        }
    }
    let availability = calendar.available(night);
    CapacityReport { night: night.clone(), availability, demand, binding: binding_crafts(&availability, &demand) }
}
