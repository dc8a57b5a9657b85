//! Live / dead / grounded partition of the network for a switching state,
//! and the hazards visible at connectivity level.
//!
//! Energization is pure reachability: a node is energized when some
//! in-service source reaches it through sections, closed devices and
//! pantograph bridges, and grounded when an applied ground reaches it the
//! same way. There are no impedances or currents in this model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::ids::*;
use crate::state::{StateError, SwitchingState};
use crate::topology::{NetworkTopology, SectionKind};

/// Default multiple of the mean source load above which a source counts as overloaded.
pub const DEFAULT_UNBALANCE_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    GroundFault,
    PhaseTie,
    BackfeedHazard,
    Unbalance,
}

impl ViolationKind {
    pub fn code(self) -> &'static str {
        match self {
            ViolationKind::GroundFault => "GROUND_FAULT",
            ViolationKind::PhaseTie => "PHASE_TIE",
            ViolationKind::BackfeedHazard => "BACKFEED_HAZARD",
            ViolationKind::Unbalance => "UNBALANCE",
        }
    }

    /// Hazards to people or plant, as opposed to the loading advisory.
    pub fn is_safety(self) -> bool {
        !matches!(self, ViolationKind::Unbalance)
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub participants: Vec<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.kind, self.participants.join(","), self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergizationResult {
    pub energized: BTreeSet<NodeId>,
    /// Every node an applied ground reaches, including faulted ones.
    pub grounded: BTreeSet<NodeId>,
    /// Neither energized nor grounded.
    pub dead: BTreeSet<NodeId>,
    pub violations: Vec<Violation>,
    pub source_scores: BTreeMap<SourceId, f64>,
}

impl EnergizationResult {
    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn safety_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.kind.is_safety())
    }

    pub fn is_energized(&self, node: &NodeId) -> bool {
        self.energized.contains(node)
    }

    /// Not energized (dead or grounded).
    pub fn de_energized(&self) -> BTreeSet<NodeId> {
        self.dead.iter().chain(self.grounded.iter().filter(|n| !self.energized.contains(*n))).cloned().collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergizationConfig {
    pub unbalance_factor: f64,
}

impl Default for EnergizationConfig {
    fn default() -> Self {
        Self { unbalance_factor: DEFAULT_UNBALANCE_FACTOR }
    }
}

/// Adjacency over sections, closed devices and (optionally) pantograph bridges.
pub(crate) struct LiveGraph {
    pub adj: Vec<Vec<usize>>,
}

impl LiveGraph {
    pub fn build(topology: &NetworkTopology, state: &SwitchingState, with_bridges: bool) -> Self {
        let ix = topology.index();
        let mut adj = vec![Vec::new(); ix.node_ids.len()];
        for &(_, a, b) in &ix.section_edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for (d, &(a, b)) in &ix.device_ends {
            if state.position(d).is_closed() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        if with_bridges {
            for (na, nb) in &state.pantograph_bridges {
                let (a, b) = (ix.node_ix[na], ix.node_ix[nb]);
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        Self { adj }
    }

    pub fn reach(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    pub fn components(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    fn distances(&self, from: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        dist[from] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

pub fn compute_energization(
    topology: &NetworkTopology,
    state: &SwitchingState,
) -> Result<EnergizationResult, StateError> {
    compute_energization_with(topology, state, &EnergizationConfig::default())
}

pub fn compute_energization_with(
    topology: &NetworkTopology,
    state: &SwitchingState,
    config: &EnergizationConfig,
) -> Result<EnergizationResult, StateError> {
    state.check(topology)?;
    let ix = topology.index();
    let n = ix.node_ids.len();

    let source_seeds: Vec<usize> = state.sources_in_service.iter().map(|s| ix.source_nodes[s]).collect();
    let ground_seeds: Vec<usize> = state.applied_grounds.iter().map(|g| ix.ground_nodes[g]).collect();

    let graph = LiveGraph::build(topology, state, true);
    let live = graph.reach(source_seeds.iter().copied());
    let earthed = graph.reach(ground_seeds.iter().copied());

    let mut violations = Vec::new();

    // A bridge that joins live wire to dead wire backfeeds the dead side.
    if !state.pantograph_bridges.is_empty() {
        let unbridged = LiveGraph::build(topology, state, false).reach(source_seeds.iter().copied());
        for (na, nb) in &state.pantograph_bridges {
            let (a, b) = (ix.node_ix[na], ix.node_ix[nb]);
            if unbridged[a] != unbridged[b] {
                let (hot, cold) = if unbridged[a] { (na, nb) } else { (nb, na) };
                violations.push(Violation {
                    kind: ViolationKind::BackfeedHazard,
                    participants: vec![na.to_string(), nb.to_string()],
                    detail: format!("train bridges energized {hot} to de-energized {cold}"),
                });
            }
        }
    }

    let comp = graph.components();

    // One fault per connected component, naming every faulted node once.
    let mut faults: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        if live[v] && earthed[v] {
            faults.entry(comp[v]).or_default().push(v);
        }
    }
    for nodes in faults.values() {
        let c = comp[nodes[0]];
        let grounds: Vec<&str> = state
            .applied_grounds
            .iter()
            .filter(|g| comp[ix.ground_nodes[*g]] == c)
            .map(|g| g.as_str())
            .collect();
        let mut ids: Vec<String> = nodes.iter().map(|&v| ix.node_ids[v].to_string()).collect();
        ids.sort();
        violations.push(Violation {
            kind: ViolationKind::GroundFault,
            participants: ids,
            detail: format!("energized conductor connected to ground(s) {}", grounds.join(",")),
        });
    }

    // Two utility grids joined through the traction network.
    let mut comp_sources: BTreeMap<usize, Vec<&SourceId>> = BTreeMap::new();
    for s in &state.sources_in_service {
        comp_sources.entry(comp[ix.source_nodes[s]]).or_default().push(s);
    }
    for sources in comp_sources.values() {
        let zones: BTreeSet<&ZoneId> = sources.iter().map(|s| &topology.sources()[*s].zone).collect();
        if zones.len() > 1 {
            violations.push(Violation {
                kind: ViolationKind::PhaseTie,
                participants: sources.iter().map(|s| s.to_string()).collect(),
                detail: format!(
                    "phase zones {} electrically connected",
                    zones.iter().map(|z| z.as_str()).collect::<Vec<_>>().join("+")
                ),
            });
        }
    }

    let source_scores = scores_on(topology, state, &live);
    if let Some(v) = unbalance_violation(&source_scores, config.unbalance_factor) {
        violations.push(v);
    }

    let mut energized = BTreeSet::new();
    let mut grounded = BTreeSet::new();
    let mut dead = BTreeSet::new();
    for v in 0..n {
        let id = ix.node_ids[v].clone();
        if live[v] {
            energized.insert(id.clone());
        }
        if earthed[v] {
            grounded.insert(id.clone());
        }
        if !live[v] && !earthed[v] {
            dead.insert(id);
        }
    }
    violations.sort();
    Ok(EnergizationResult { energized, grounded, dead, violations, source_scores })
}

/// Per in-service source, the number of energized trolley sections that are
/// nearest (in closed-edge hops) to it; equidistant sections are shared.
pub fn unbalance_metric(
    topology: &NetworkTopology,
    state: &SwitchingState,
) -> Result<BTreeMap<SourceId, f64>, StateError> {
    state.check(topology)?;
    let ix = topology.index();
    let graph = LiveGraph::build(topology, state, true);
    let live = graph.reach(state.sources_in_service.iter().map(|s| ix.source_nodes[s]));
    Ok(scores_on(topology, state, &live))
}

fn scores_on(topology: &NetworkTopology, state: &SwitchingState, live: &[bool]) -> BTreeMap<SourceId, f64> {
    let ix = topology.index();
    let graph = LiveGraph::build(topology, state, false);
    let dists: Vec<(&SourceId, Vec<usize>)> = state
        .sources_in_service
        .iter()
        .map(|s| (s, graph.distances(ix.source_nodes[s])))
        .collect();
    let mut scores: BTreeMap<SourceId, f64> = state.sources_in_service.iter().map(|s| (s.clone(), 0.0)).collect();
    for s in topology.sections().values().filter(|s| s.kind == SectionKind::Trolley) {
        let (a, b) = (ix.node_ix[&s.endpoints.0], ix.node_ix[&s.endpoints.1]);
        if !live[a] {
            continue;
        }
        let per_source: Vec<(&SourceId, usize)> = dists.iter().map(|(id, d)| (*id, d[a].min(d[b]))).collect();
        let best = per_source.iter().map(|(_, d)| *d).min().unwrap_or(usize::MAX);
        if best == usize::MAX {
            continue;
        }
        let winners: Vec<&SourceId> = per_source.iter().filter(|(_, d)| *d == best).map(|(id, _)| *id).collect();
        let share = 1.0 / winners.len() as f64;
        for w in winners {
            *scores.get_mut(w).unwrap() += share;
        }
    }
    scores
}

fn unbalance_violation(scores: &BTreeMap<SourceId, f64>, factor: f64) -> Option<Violation> {
    if scores.len() < 2 {
        return None;
    }
    let mean = scores.values().sum::<f64>() / scores.len() as f64;
    let (max_id, max) = scores.iter().fold((None, f64::MIN), |(id, m), (s, &v)| if v > m { (Some(s), v) } else { (id, m) });
    if max > factor * mean {
        let id = max_id.expect("nonempty");
        Some(Violation {
            kind: ViolationKind::Unbalance,
            participants: vec![id.to_string()],
            detail: format!("load score {max:.1} exceeds {factor} x mean {mean:.2}"),
        })
    } else {
        None
    }
}
