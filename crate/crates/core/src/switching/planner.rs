//! Isolation planning: the eight-step switching construction.
//!
//! Given a request for target sections `T` (closed under sections), the
//! planner picks a final device configuration and then writes the sequence
//! that reaches it safely:
//!
//! 1. open the load-break devices `W` that bound the widened dead region `R`
//!    (every non-load-break device that must move lies inside `R`);
//! 2. open and tag the boundary devices of `T`;
//! 3. close and tag backfeed ties for keep-live sections;
//! 4. rack out and tag the breakers of substations inside the target, then
//!    test and ground their taps;
//! 5. test and apply local grounds inside `T` (the widened region is still
//!    dead here, which is how pole-climb grounds get their safe window);
//! 6. (anchor bridges are covered by step 5's widen/restore pattern);
//! 7. re-close `W` minus the boundary devices, re-energizing `R \ T`;
//! 8. test and apply box grounds at both ends of every line group in `T`.
//!
//! The restore sequence is the exact reverse with inverse op kinds. Every op,
//! forward and reverse, is simulated through the interlocks and the
//! energization checker before a plan is returned.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::order::{OperatingOrder, OrderPhase};
use super::request::IsolationRequest;
use super::{apply_op, validate_op, Actor, InterlockError, OpContext, OpKind, OpOutcome, SwitchOp};
use crate::energization::{compute_energization, LiveGraph};
use crate::ids::*;
use crate::plate_orders::{select_plate_order, PlateError};
use crate::state::{Position, SwitchingState};
use crate::topology::{GroundKind, NetworkTopology, SectionKind, CATENARY_SPACING_FT};

/// Maximum trolley work zone: 30 catenary structures.
pub const MAX_WORK_ZONE_FT: i64 = 30 * CATENARY_SPACING_FT;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanOptions {
    pub director: PersonId,
    pub date: String,
    /// Extra plate-order coverage required beyond each target section's ends.
    pub margin_ft: i64,
    /// Configuration search is exhaustive up to this many candidate devices,
    /// greedy beyond it.
    pub exhaustive_limit: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self { director: PersonId::new("PD1"), date: "unscheduled".into(), margin_ft: 0, exhaustive_limit: 12 }
    }
}

/// One piece of a suggested split of an over-long request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPart {
    pub track: TrackId,
    pub start_ft: i64,
    pub end_ft: i64,
    pub sections: Vec<SectionId>,
}

impl SplitPart {
    pub fn span_ft(&self) -> i64 {
        self.end_ft - self.start_ft
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("request has no target sections")]
    EmptyTarget,
    #[error("unknown section `{0}`")]
    UnknownSection(SectionId),
    #[error("signal feeder `{0}` must stay energized and cannot be isolated")]
    SignalFeederTarget(SectionId),
    #[error("SPAN_EXCEEDED: track {track} target spans {span_ft} ft (limit {MAX_WORK_ZONE_FT}); split into {}", fmt_split(.suggestion))]
    SpanExceeded { track: TrackId, span_ft: i64, suggestion: Vec<SplitPart> },
    #[error("source {0} lies inside the target and can never be de-energized")]
    SourceInTarget(SourceId),
    #[error("train bridges target node {0} to {1}; clear it before isolating")]
    BridgedTarget(NodeId, NodeId),
    #[error("initial state is unsafe: {}", .0.join("; "))]
    UnsafeInitialState(Vec<String>),
    #[error("cannot de-energize the target: {detail} [{}]", participants.join(","))]
    CannotDeenergize { detail: String, participants: Vec<String> },
    #[error("NO_BOX_GROUND: line group {group} has no ground point at {location_ft} ft")]
    NoBoxGround { group: LineGroup, location_ft: i64 },
    #[error("{0}")]
    NoPlateOrder(#[from] PlateError),
    #[error("op {seq} ({op}) rejected during simulation: {error}")]
    SequenceRejected { seq: u32, op: String, error: String },
}

fn fmt_split(parts: &[SplitPart]) -> String {
    parts.iter().map(|p| format!("{}:{}..{}", p.track, p.start_ft, p.end_ft)).collect::<Vec<_>>().join(" ")
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::EmptyTarget => "EMPTY_TARGET",
            PlanError::UnknownSection(_) => "UNKNOWN_SECTION",
            PlanError::SignalFeederTarget(_) => "SIGNAL_FEEDER_TARGET",
            PlanError::SpanExceeded { .. } => "SPAN_EXCEEDED",
            PlanError::SourceInTarget(_) => "SOURCE_IN_TARGET",
            PlanError::BridgedTarget(..) => "BRIDGED_TARGET",
            PlanError::UnsafeInitialState(_) => "UNSAFE_INITIAL_STATE",
            PlanError::CannotDeenergize { .. } => "CANNOT_DEENERGIZE",
            PlanError::NoBoxGround { .. } => "NO_BOX_GROUND",
            PlanError::NoPlateOrder(e) => e.code(),
            PlanError::SequenceRejected { .. } => "SEQUENCE_REJECTED",
        }
    }

    /// Usage-level problems with the request itself, as opposed to the network.
    pub fn is_request_error(&self) -> bool {
        matches!(self, PlanError::EmptyTarget | PlanError::UnknownSection(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsolationPlan {
    pub request: RequestId,
    /// One isolation form per line group, in line-group order.
    pub forms: Vec<OperatingOrder>,
    /// Matching restore forms (same line groups).
    pub restore_forms: Vec<OperatingOrder>,
    pub plate_order: Option<PlateOrderId>,
    /// (isolation ops, restore ops)
    pub predicted_counts: (usize, usize),
    /// Closure of the target sections' nodes.
    pub target_nodes: BTreeSet<NodeId>,
    /// KEEPLIVE_INFEASIBLE: keep-live sections the plan cannot keep energized.
    pub keep_live_infeasible: Vec<SectionId>,
    /// Whether the final energized set is exactly the initial one minus the target.
    pub exact: bool,
    /// Devices moved away from their initial position in the final configuration
    /// besides the target boundary.
    pub toggles: Vec<(DeviceId, Position)>,
}

impl IsolationPlan {
    /// Isolation ops across all forms in execution order.
    pub fn isolation_sequence(&self) -> Vec<&SwitchOp> {
        sequence(&self.forms)
    }

    /// Restore ops across all forms in execution order.
    pub fn restore_sequence(&self) -> Vec<&SwitchOp> {
        sequence(&self.restore_forms)
    }

    pub fn form(&self, group: &str) -> Option<&OperatingOrder> {
        self.forms.iter().find(|f| f.line_group.as_str() == group)
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "plan {}: {} forms, {} isolation ops, {} restore ops, plate order {}, {}",
            self.request,
            self.forms.len(),
            self.predicted_counts.0,
            self.predicted_counts.1,
            self.plate_order.as_ref().map(|p| p.as_str()).unwrap_or("-"),
            if self.exact { "exact" } else { "inexact" },
        );
        for s in &self.keep_live_infeasible {
            out.push_str(&format!("\nKEEPLIVE_INFEASIBLE {s}"));
        }
        out
    }
}

fn sequence(forms: &[OperatingOrder]) -> Vec<&SwitchOp> {
    let mut ops: Vec<&SwitchOp> = forms.iter().flat_map(|f| f.ops.iter()).collect();
    ops.sort_by_key(|o| o.seq);
    ops
}

/// Split a track's target sections into consecutive parts of at most
/// [`MAX_WORK_ZONE_FT`] each; sections longer than the limit are cut by stationing.
pub fn split_suggestion(topology: &NetworkTopology, track: &TrackId, sections: &[SectionId]) -> Vec<SplitPart> {
    let mut secs: Vec<_> = sections.iter().filter_map(|s| topology.section(s.as_str())).collect();
    secs.sort_by_key(|s| (s.start_ft, s.id.clone()));
    // (part, whether it is a cut of one over-long section and must not grow)
    let mut parts: Vec<(SplitPart, bool)> = Vec::new();
    for s in secs {
        if s.length_ft() > MAX_WORK_ZONE_FT {
            let mut at = s.start_ft;
            while at < s.end_ft {
                let end = (at + MAX_WORK_ZONE_FT).min(s.end_ft);
                let part = SplitPart { track: track.clone(), start_ft: at, end_ft: end, sections: vec![s.id.clone()] };
                parts.push((part, true));
                at = end;
            }
            continue;
        }
        match parts.last_mut() {
            Some((p, false)) if s.end_ft.max(p.end_ft) - p.start_ft <= MAX_WORK_ZONE_FT => {
                p.end_ft = p.end_ft.max(s.end_ft);
                p.sections.push(s.id.clone());
            }
            _ => {
                let part = SplitPart {
                    track: track.clone(),
                    start_ft: s.start_ft,
                    end_ft: s.end_ft,
                    sections: vec![s.id.clone()],
                };
                parts.push((part, false));
            }
        }
    }
    parts.into_iter().map(|(p, _)| p).collect()
}

pub fn plan_isolation(
    topology: &NetworkTopology,
    state: &SwitchingState,
    request: &IsolationRequest,
) -> Result<IsolationPlan, PlanError> {
    plan_isolation_with(topology, state, request, &PlanOptions::default())
}

/// A candidate final configuration beyond the boundary: devices to open and
/// ties (or other open devices) to close.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Config {
    opens: Vec<DeviceId>,
    closes: Vec<DeviceId>,
}

impl Config {
    fn len(&self) -> usize {
        self.opens.len() + self.closes.len()
    }
}

struct Evaluation {
    /// (keep-live sections lost, nodes lost + gained, toggles)
    key: (usize, usize, usize),
    lost_keep_live: Vec<SectionId>,
    exact: bool,
    region: Vec<bool>,
}

struct Planner<'a> {
    topo: &'a NetworkTopology,
    s0: &'a SwitchingState,
    request: &'a IsolationRequest,
    opts: &'a PlanOptions,
    in_t: Vec<bool>,
    boundary: Vec<DeviceId>,
    source_breakers: Vec<DeviceId>,
    live0: Vec<bool>,
    keep_live: Vec<SectionId>,
    is_source_node: Vec<bool>,
}

pub fn plan_isolation_with(
    topology: &NetworkTopology,
    state: &SwitchingState,
    request: &IsolationRequest,
    opts: &PlanOptions,
) -> Result<IsolationPlan, PlanError> {
    if request.target_sections.is_empty() {
        return Err(PlanError::EmptyTarget);
    }
    let mut by_track: BTreeMap<TrackId, Vec<SectionId>> = BTreeMap::new();
    for sid in &request.target_sections {
        let s = topology.section(sid.as_str()).ok_or_else(|| PlanError::UnknownSection(sid.clone()))?;
        match s.kind {
            SectionKind::SignalFeeder => return Err(PlanError::SignalFeederTarget(sid.clone())),
            SectionKind::Trolley => by_track.entry(s.track.clone().expect("trolley has track")).or_default().push(sid.clone()),
            _ => {}
        }
    }
    for (track, secs) in &by_track {
        let lo = secs.iter().map(|s| topology.section(s.as_str()).unwrap().start_ft).min().unwrap();
        let hi = secs.iter().map(|s| topology.section(s.as_str()).unwrap().end_ft).max().unwrap();
        if hi - lo > MAX_WORK_ZONE_FT {
            return Err(PlanError::SpanExceeded {
                track: track.clone(),
                span_ft: hi - lo,
                suggestion: split_suggestion(topology, track, secs),
            });
        }
    }
    let e0 = compute_energization(topology, state).map_err(|e| PlanError::UnsafeInitialState(vec![e.to_string()]))?;
    let unsafe_now: Vec<String> = e0.safety_violations().map(|v| format!("{} {}", v.kind.code(), v.participants.join(","))).collect();
    if !unsafe_now.is_empty() {
        return Err(PlanError::UnsafeInitialState(unsafe_now));
    }

    let ix = topology.index();
    let n = ix.node_ids.len();

    // T: target nodes closed over sections.
    let mut adj = vec![Vec::new(); n];
    for (_, a, b) in &ix.section_edges {
        adj[*a].push(*b);
        adj[*b].push(*a);
    }
    let seeds = request.target_sections.iter().flat_map(|s| {
        let s = topology.section(s.as_str()).unwrap();
        [ix.node_ix[&s.endpoints.0], ix.node_ix[&s.endpoints.1]]
    });
    let in_t = closure(&adj, seeds);

    let mut is_source_node = vec![false; n];
    for (sid, &v) in &ix.source_nodes {
        is_source_node[v] = true;
        if in_t[v] && state.sources_in_service.contains(sid) {
            return Err(PlanError::SourceInTarget(sid.clone()));
        }
    }
    for (a, b) in &state.pantograph_bridges {
        let (ia, ib) = (ix.node_ix[a], ix.node_ix[b]);
        if in_t[ia] != in_t[ib] {
            return Err(PlanError::BridgedTarget(a.clone(), b.clone()));
        }
    }

    let boundary: Vec<DeviceId> = ix
        .device_ends
        .iter()
        .filter(|(_, (a, b))| in_t[*a] != in_t[*b])
        .map(|(d, _)| d.clone())
        .collect();

    // Substations inside the target's stationing hull feed it through boundary breakers.
    let t_locs: Vec<i64> = (0..n).filter(|&i| in_t[i]).map(|i| topology.nodes()[&ix.node_ids[i]].location_ft).collect();
    let (hull_lo, hull_hi) = (*t_locs.iter().min().unwrap(), *t_locs.iter().max().unwrap());
    let inside_sources: BTreeSet<usize> = topology
        .sources()
        .values()
        .filter(|s| state.sources_in_service.contains(&s.id))
        .filter(|s| {
            let loc = topology.nodes()[&s.node].location_ft;
            hull_lo < loc && loc < hull_hi
        })
        .map(|s| ix.node_ix[&s.node])
        .collect();
    let source_breakers: Vec<DeviceId> = boundary
        .iter()
        .filter(|d| {
            let dev = topology.device(d.as_str()).unwrap();
            let (a, b) = ix.device_ends[*d];
            dev.load_break && (inside_sources.contains(&a) || inside_sources.contains(&b))
        })
        .cloned()
        .collect();

    let live0: Vec<bool> = ix.node_ids.iter().map(|id| e0.energized.contains(id)).collect();
    let keep_live: Vec<SectionId> = request
        .effective_keep_live(topology)
        .into_iter()
        .filter(|s| {
            topology.section(s.as_str()).is_some_and(|sec| {
                let (a, b) = (ix.node_ix[&sec.endpoints.0], ix.node_ix[&sec.endpoints.1]);
                !in_t[a] && !in_t[b] && live0[a] && live0[b]
            })
        })
        .collect();

    let planner = Planner {
        topo: topology,
        s0: state,
        request,
        opts,
        in_t,
        boundary,
        source_breakers,
        live0,
        keep_live,
        is_source_node,
    };
    planner.run()
}

fn closure(adj: &[Vec<usize>], seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

/// A planned op before numbering: (line group, op).
type Draft = (LineGroup, SwitchOp);

impl<'a> Planner<'a> {
    fn run(&self) -> Result<IsolationPlan, PlanError> {
        let ix = self.topo.index();
        let candidates: Vec<DeviceId> = ix
            .device_ends
            .iter()
            .filter(|(d, (a, b))| !self.in_t[*a] && !self.in_t[*b] && self.s0.position(d) != Position::RackedOut)
            .map(|(d, _)| d.clone())
            .collect();

        let mut last_err: Option<PlanError> = None;
        let base = Config::default();
        if let Err(e) = self.evaluate(&base) {
            return Err(e);
        }

        if candidates.len() <= self.opts.exhaustive_limit {
            let mut ranked: Vec<(Evaluation, Config)> = Vec::new();
            for mask in 0u32..(1u32 << candidates.len()) {
                let mut cfg = Config::default();
                for (i, d) in candidates.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        if self.s0.position(d) == Position::Closed {
                            cfg.opens.push(d.clone());
                        } else {
                            cfg.closes.push(d.clone());
                        }
                    }
                }
                if let Ok(ev) = self.evaluate(&cfg) {
                    ranked.push((ev, cfg));
                }
            }
            ranked.sort_by(|(ea, ca), (eb, cb)| {
                ea.key.cmp(&eb.key).then_with(|| (&ca.opens, &ca.closes).cmp(&(&cb.opens, &cb.closes)))
            });
            for (ev, cfg) in ranked {
                match self.build(&cfg, &ev) {
                    Ok(plan) => return Ok(plan),
                    Err(e) => last_err = Some(e),
                }
            }
        } else {
            let ties: Vec<DeviceId> =
                candidates.iter().filter(|d| self.s0.position(d) == Position::Open).cloned().collect();
            let mut cfg = base;
            let mut banned: BTreeSet<DeviceId> = BTreeSet::new();
            loop {
                // Greedy: repeatedly close the tie that most improves the ranking key.
                let mut current = self.evaluate(&cfg).ok();
                loop {
                    let Some(cur) = &current else { break };
                    if cur.key.0 == 0 && cur.key.1 == 0 {
                        break;
                    }
                    let mut best: Option<(Evaluation, DeviceId)> = None;
                    for t in &ties {
                        if cfg.closes.contains(t) || banned.contains(t) {
                            continue;
                        }
                        let mut trial = cfg.clone();
                        trial.closes.push(t.clone());
                        if let Ok(ev) = self.evaluate(&trial) {
                            if (ev.key.0, ev.key.1) < (cur.key.0, cur.key.1)
                                && best.as_ref().is_none_or(|(b, _)| ev.key < b.key)
                            {
                                best = Some((ev, t.clone()));
                            }
                        }
                    }
                    match best {
                        Some((ev, t)) => {
                            cfg.closes.push(t);
                            current = Some(ev);
                        }
                        None => break,
                    }
                }
                cfg.closes.sort();
                let ev = self.evaluate(&cfg)?;
                match self.build(&cfg, &ev) {
                    Ok(plan) => return Ok(plan),
                    Err(PlanError::SequenceRejected { seq, op, error }) => {
                        let _ = &error;
                        // Drop a tie the failure is attributable to, then retry.
                        let culprit = cfg.closes.iter().find(|t| op.contains(&format!(" {} ", t))).cloned();
                        match culprit {
                            Some(t) => {
                                banned.insert(t.clone());
                                cfg = Config::default();
                            }
                            None => return Err(PlanError::SequenceRejected { seq, op, error }),
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        Err(last_err.unwrap_or_else(|| PlanError::CannotDeenergize {
            detail: "no configuration passes simulation".into(),
            participants: vec![self.request.id.to_string()],
        }))
    }

    fn final_state(&self, cfg: &Config) -> SwitchingState {
        let mut s = self.s0.clone();
        for d in &self.boundary {
            if s.position(d) == Position::Closed {
                s.set_position(d.clone(), Position::Open);
            }
        }
        for d in &cfg.opens {
            s.set_position(d.clone(), Position::Open);
        }
        for d in &cfg.closes {
            s.set_position(d.clone(), Position::Closed);
        }
        s
    }

    /// The region that must be dead while non-load-break devices move:
    /// the target plus every terminal of a moving non-load-break device,
    /// closed over sections, bridges, closed non-load-break devices and
    /// non-load-break ties being closed.
    fn region(&self, cfg: &Config) -> Result<Vec<bool>, PlanError> {
        let ix = self.topo.index();
        let n = ix.node_ids.len();
        let mut adj = vec![Vec::new(); n];
        for (_, a, b) in &ix.section_edges {
            adj[*a].push(*b);
            adj[*b].push(*a);
        }
        for (na, nb) in &self.s0.pantograph_bridges {
            let (a, b) = (ix.node_ix[na], ix.node_ix[nb]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seeds: Vec<usize> = (0..n).filter(|&i| self.in_t[i]).collect();
        for (d, &(a, b)) in &ix.device_ends {
            let dev = self.topo.device(d.as_str()).unwrap();
            if dev.load_break {
                continue;
            }
            let closing = cfg.closes.contains(d);
            if self.s0.position(d) == Position::Closed || closing {
                adj[a].push(b);
                adj[b].push(a);
            }
            if closing || cfg.opens.contains(d) {
                seeds.extend([a, b]);
            }
        }
        let region = closure(&adj, seeds);
        let trapped: Vec<String> = ix
            .source_nodes
            .iter()
            .filter(|(s, &v)| region[v] && self.s0.sources_in_service.contains(*s))
            .map(|(s, _)| s.to_string())
            .collect();
        if !trapped.is_empty() {
            let mut participants = trapped;
            participants.extend(
                cfg.opens.iter().chain(&cfg.closes).chain(&self.boundary).filter(|d| {
                    let (a, b) = ix.device_ends[*d];
                    !self.topo.device(d.as_str()).unwrap().load_break && (region[a] || region[b])
                }).map(|d| d.to_string()),
            );
            return Err(PlanError::CannotDeenergize {
                detail: "a source is connected to the work area through devices that cannot break load".into(),
                participants,
            });
        }
        Ok(region)
    }

    fn evaluate(&self, cfg: &Config) -> Result<Evaluation, PlanError> {
        let ix = self.topo.index();
        let f = self.final_state(cfg);
        let graph = LiveGraph::build(self.topo, &f, true);
        let live = graph.reach(f.sources_in_service.iter().map(|s| ix.source_nodes[s]));
        if let Some(i) = (0..live.len()).find(|&i| live[i] && self.in_t[i]) {
            return Err(PlanError::CannotDeenergize {
                detail: "target remains energized with its boundary open".into(),
                participants: vec![ix.node_ids[i].to_string()],
            });
        }
        let e = compute_energization(self.topo, &f).expect("state ids come from the topology");
        if let Some(v) = e.safety_violations().next() {
            return Err(PlanError::CannotDeenergize {
                detail: format!("final configuration has {}", v.kind.code()),
                participants: v.participants.clone(),
            });
        }
        let region = self.region(cfg)?;
        let mut changed = 0;
        for i in 0..live.len() {
            if !self.in_t[i] && live[i] != self.live0[i] {
                changed += 1;
            }
        }
        let lost_keep_live: Vec<SectionId> = self
            .keep_live
            .iter()
            .filter(|s| {
                let sec = self.topo.section(s.as_str()).unwrap();
                !live[ix.node_ix[&sec.endpoints.0]] || !live[ix.node_ix[&sec.endpoints.1]]
            })
            .cloned()
            .collect();
        Ok(Evaluation { key: (lost_keep_live.len(), changed, cfg.len()), lost_keep_live, exact: changed == 0, region })
    }

    fn node_group(&self, i: usize) -> LineGroup {
        self.topo.index().node_group[i].clone()
    }

    fn device_group(&self, d: &DeviceId, region: &[bool]) -> LineGroup {
        let (a, b) = self.topo.index().device_ends[d];
        for i in [a, b] {
            if self.in_t[i] {
                return self.node_group(i);
            }
        }
        for i in [a, b] {
            if region[i] && !self.is_source_node[i] {
                return self.node_group(i);
            }
        }
        for i in [a, b] {
            if !self.is_source_node[i] {
                return self.node_group(i);
            }
        }
        self.node_group(a)
    }

    fn ground_group(&self, g: &GroundId) -> LineGroup {
        self.node_group(self.topo.index().ground_nodes[g])
    }

    fn op(&self, kind: OpKind, target: &str, step: u8) -> SwitchOp {
        let mut op = SwitchOp::new(kind, target, SwitchOp::actor_for(self.topo, kind, target));
        op.step = step;
        op
    }

    fn usable_ground(&self, kind: GroundKind) -> bool {
        kind != GroundKind::Aerial || self.request.allow_aerial_grounds
    }

    /// Box-ground choice per line group: a ground point at each stationing
    /// extremity of the group's target nodes.
    fn box_grounds(&self) -> Result<Vec<GroundId>, PlanError> {
        let ix = self.topo.index();
        let mut groups: BTreeMap<LineGroup, Vec<usize>> = BTreeMap::new();
        for i in 0..self.in_t.len() {
            if self.in_t[i] {
                groups.entry(self.node_group(i)).or_default().push(i);
            }
        }
        let loc = |i: usize| self.topo.nodes()[&ix.node_ids[i]].location_ft;
        let mut chosen = Vec::new();
        for (group, nodes) in groups {
            let lo = nodes.iter().map(|&i| loc(i)).min().unwrap();
            let hi = nodes.iter().map(|&i| loc(i)).max().unwrap();
            for at in if lo == hi { vec![lo] } else { vec![lo, hi] } {
                let best = self
                    .topo
                    .ground_points()
                    .values()
                    .filter(|g| {
                        let i = ix.ground_nodes[&g.id];
                        self.in_t[i] && loc(i) == at && nodes.contains(&i) && self.usable_ground(g.kind)
                    })
                    .min_by_key(|g| (g.kind != GroundKind::Box, g.kind, g.id.clone()));
                match best {
                    Some(g) => {
                        if !chosen.contains(&g.id) {
                            chosen.push(g.id.clone());
                        }
                    }
                    None => return Err(PlanError::NoBoxGround { group: group.clone(), location_ft: at }),
                }
            }
        }
        Ok(chosen)
    }

    fn sorted(&self, mut items: Vec<(LineGroup, String)>) -> Vec<(LineGroup, String)> {
        items.sort();
        items.dedup();
        items
    }

    fn draft(&self, cfg: &Config, region: &[bool]) -> Result<Vec<Draft>, PlanError> {
        let topo = self.topo;
        let ix = topo.index();
        let lb = |d: &DeviceId| topo.device(d.as_str()).unwrap().load_break;
        let moved: BTreeSet<&DeviceId> = cfg.opens.iter().chain(&cfg.closes).collect();
        let w: Vec<DeviceId> = ix
            .device_ends
            .iter()
            .filter(|(d, (a, b))| {
                region[*a] != region[*b]
                    && lb(d)
                    && self.s0.position(d) == Position::Closed
                    && !moved.contains(d)
            })
            .map(|(d, _)| d.clone())
            .collect();
        let boundary: BTreeSet<&DeviceId> = self.boundary.iter().collect();
        let source_breakers: BTreeSet<&DeviceId> = self.source_breakers.iter().collect();
        let mut out: Vec<Draft> = Vec::new();
        let mut opened: BTreeSet<DeviceId> = BTreeSet::new();

        // Step 1: de-energize the widened region from the nearest load-break devices.
        let step1: Vec<_> = w
            .iter()
            .chain(cfg.opens.iter().filter(|d| lb(d)))
            .map(|d| (self.device_group(d, region), d.to_string()))
            .collect();
        for (g, d) in self.sorted(step1) {
            out.push((g, self.op(OpKind::Open, &d, 1)));
            opened.insert(DeviceId::new(d));
        }

        // Step 2: open and tag the boundary (now dead where it cannot break load).
        let step2: Vec<_> = self
            .boundary
            .iter()
            .filter(|d| !source_breakers.contains(d))
            .chain(cfg.opens.iter().filter(|d| !lb(d)))
            .map(|d| (self.device_group(d, region), d.to_string()))
            .collect();
        for (g, d) in self.sorted(step2) {
            let id = DeviceId::new(d.as_str());
            if self.s0.position(&id) == Position::Closed && !opened.contains(&id) {
                out.push((g.clone(), self.op(OpKind::Open, &d, 2)));
                opened.insert(id);
            }
            out.push((g, self.op(OpKind::Tag, &d, 2)));
        }

        // Step 3: backfeed ties, non-load-break ones first (while the region is dead).
        let mut step3: Vec<_> = cfg
            .closes
            .iter()
            .map(|d| (lb(d), self.device_group(d, region), d.to_string()))
            .collect();
        step3.sort();
        for (_, g, d) in step3 {
            out.push((g.clone(), self.op(OpKind::Close, &d, 3)));
            out.push((g, self.op(OpKind::Tag, &d, 3)));
        }

        // Step 4: substations inside the target.
        let box_grounds = self.box_grounds()?;
        let mut used: BTreeSet<GroundId> = self.s0.applied_grounds.clone();
        let step4: Vec<_> = self.source_breakers.iter().map(|d| (self.device_group(d, region), d.to_string())).collect();
        let mut tap_nodes: BTreeSet<usize> = BTreeSet::new();
        for (g, d) in self.sorted(step4) {
            let id = DeviceId::new(d.as_str());
            let dev = topo.device(&d).unwrap();
            if self.s0.position(&id) == Position::Closed && !opened.contains(&id) {
                out.push((g.clone(), self.op(OpKind::Open, &d, 4)));
                opened.insert(id.clone());
            }
            if dev.rackable && self.s0.position(&id) != Position::RackedOut {
                out.push((g.clone(), self.op(OpKind::RackOut, &d, 4)));
            }
            out.push((g, self.op(OpKind::Tag, &d, 4)));
            let (a, b) = ix.device_ends[&id];
            tap_nodes.extend([a, b].into_iter().filter(|&i| self.in_t[i]));
        }
        let mut taps: Vec<(LineGroup, String)> = Vec::new();
        for &i in &tap_nodes {
            let tap = topo
                .ground_points()
                .values()
                .filter(|g| ix.ground_nodes[&g.id] == i && self.usable_ground(g.kind) && !used.contains(&g.id))
                .min_by_key(|g| g.id.clone());
            if let Some(g) = tap {
                taps.push((self.ground_group(&g.id), g.id.to_string()));
            }
        }
        for (g, gid) in self.sorted(taps) {
            out.push((g.clone(), self.op(OpKind::TestPotential, &gid, 4)));
            out.push((g, self.op(OpKind::ApplyGround, &gid, 4)));
            used.insert(GroundId::new(gid));
        }

        // Step 5: local grounds inside the target while the widened region is dead.
        let local: Vec<_> = topo
            .ground_points()
            .values()
            .filter(|g| {
                self.in_t[ix.ground_nodes[&g.id]]
                    && matches!(g.kind, GroundKind::Local | GroundKind::Aerial)
                    && self.usable_ground(g.kind)
                    && !used.contains(&g.id)
                    && !box_grounds.contains(&g.id)
            })
            .map(|g| (self.ground_group(&g.id), g.id.to_string()))
            .collect();
        let mut tested: BTreeMap<LineGroup, BTreeSet<usize>> = BTreeMap::new();
        for (g, gid) in self.sorted(local) {
            let node = ix.ground_nodes[gid.as_str()];
            if !tested.get(&g).is_some_and(|t| t.contains(&node)) {
                out.push((g.clone(), self.op(OpKind::TestPotential, &gid, 5)));
                // A test covers the target component it touches (T is isolated by now).
                tested.entry(g.clone()).or_default().extend(self.t_component(node));
            }
            out.push((g, self.op(OpKind::ApplyGround, &gid, 5)));
            used.insert(GroundId::new(gid));
        }

        // Step 7: re-energize everything outside the target.
        let step7: Vec<_> = w
            .iter()
            .filter(|d| !boundary.contains(d))
            .map(|d| (self.device_group(d, region), d.to_string()))
            .collect();
        for (g, d) in self.sorted(step7) {
            out.push((g, self.op(OpKind::Close, &d, 7)));
        }

        // Step 8: box grounds.
        let step8: Vec<_> = box_grounds
            .iter()
            .filter(|g| !used.contains(*g))
            .map(|g| (self.ground_group(g), g.to_string()))
            .collect();
        for (g, gid) in self.sorted(step8) {
            out.push((g.clone(), self.op(OpKind::TestPotential, &gid, 8)));
            out.push((g, self.op(OpKind::ApplyGround, &gid, 8)));
        }
        Ok(out)
    }

    /// Target nodes connected to `node` through sections and internal
    /// devices closed in the initial state.
    fn t_component(&self, node: usize) -> Vec<usize> {
        let graph = LiveGraph::build(self.topo, self.s0, true);
        let mut seen = vec![false; graph.adj.len()];
        seen[node] = true;
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            for &v in &graph.adj[u] {
                if self.in_t[v] && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        (0..seen.len()).filter(|&i| seen[i]).collect()
    }

    /// Execute `ops` from `start`, checking each op, its inverse and the
    /// resulting state. Returns the final state.
    fn simulate(&self, start: &SwitchingState, ops: &[Draft]) -> Result<SwitchingState, PlanError> {
        let mut state = start.clone();
        let mut tested: BTreeMap<&LineGroup, BTreeSet<NodeId>> = BTreeMap::new();
        for (group, op) in ops {
            let ctx = OpContext {
                director: self.opts.director.clone(),
                tested_dead: tested.get(group).cloned().unwrap_or_default(),
                require_test: true,
                now: 0,
            };
            let reject = |e: &dyn fmt::Display| PlanError::SequenceRejected {
                seq: op.seq,
                op: format!("{} {} {} ", op.seq, op.kind, op.target),
                error: e.to_string(),
            };
            validate_op(self.topo, &state, op, &ctx).map_err(|e: InterlockError| reject(&e))?;
            let (next, outcome) = apply_op(self.topo, &state, op, &ctx);
            let undo = OpContext { require_test: false, ..ctx };
            validate_op(self.topo, &next, &op.inverse(), &undo).map_err(|e| reject(&format!("irreversible: {e}")))?;
            let e = compute_energization(self.topo, &next).expect("ids from topology");
            if let Some(v) = e.safety_violations().next() {
                return Err(reject(&format!("{} {}", v.kind.code(), v.participants.join(","))));
            }
            if let OpOutcome::TestedDead(nodes) = outcome {
                tested.entry(group).or_default().extend(nodes);
            }
            state = next;
        }
        Ok(state)
    }

    fn build(&self, cfg: &Config, ev: &Evaluation) -> Result<IsolationPlan, PlanError> {
        let mut drafts = self.draft(cfg, &ev.region)?;
        let req = &self.request.id;
        for (i, (g, op)) in drafts.iter_mut().enumerate() {
            op.seq = i as u32 + 1;
            op.order_ref = OrderId::new(format!("{req}-{g}"));
        }
        let isolated = self.simulate(self.s0, &drafts)?;

        let total = drafts.len() as u32;
        let restore: Vec<Draft> = drafts
            .iter()
            .rev()
            .enumerate()
            .map(|(i, (g, op))| {
                let mut inv = op.inverse();
                inv.seq = i as u32 + 1;
                inv.order_ref = OrderId::new(format!("{req}-{g}-R"));
                (g.clone(), inv)
            })
            .collect();
        debug_assert_eq!(restore.len() as u32, total);
        let restored = self.simulate(&isolated, &restore)?;
        if restored.restorable_view() != self.s0.restorable_view() {
            return Err(PlanError::SequenceRejected {
                seq: total,
                op: "restore".into(),
                error: "restore does not return the initial state".into(),
            });
        }

        let plate_order = if self.topo.plate_library().is_empty() {
            None
        } else {
            Some(select_plate_order(self.topo.plate_library(), self.topo, self.request, self.opts.margin_ft)?.id.clone())
        };

        let forms = self.forms(&drafts, OrderPhase::Isolation, &plate_order);
        let restore_forms = self.forms(&restore, OrderPhase::Restore, &plate_order);
        let ix = self.topo.index();
        let mut toggles: Vec<(DeviceId, Position)> = cfg
            .opens
            .iter()
            .map(|d| (d.clone(), Position::Open))
            .chain(cfg.closes.iter().map(|d| (d.clone(), Position::Closed)))
            .collect();
        toggles.sort();
        Ok(IsolationPlan {
            request: req.clone(),
            forms,
            restore_forms,
            plate_order,
            predicted_counts: (drafts.len(), restore.len()),
            target_nodes: (0..self.in_t.len()).filter(|&i| self.in_t[i]).map(|i| ix.node_ids[i].clone()).collect(),
            keep_live_infeasible: ev.lost_keep_live.clone(),
            exact: ev.exact,
            toggles,
        })
    }

    fn forms(&self, drafts: &[Draft], phase: OrderPhase, plate: &Option<PlateOrderId>) -> Vec<OperatingOrder> {
        let mut by_group: BTreeMap<&LineGroup, Vec<SwitchOp>> = BTreeMap::new();
        for (g, op) in drafts {
            by_group.entry(g).or_default().push(op.clone());
        }
        by_group
            .into_iter()
            .map(|(g, ops)| {
                let mut o = OperatingOrder::new(ops[0].order_ref.clone(), g.clone(), self.opts.director.clone());
                o.phase = phase;
                o.date = self.opts.date.clone();
                o.request = Some(self.request.id.clone());
                o.plate_order = plate.clone();
                o.ops = ops;
                o
            })
            .collect()
    }
}

impl fmt::Display for IsolationPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for form in &self.forms {
            let remote = form.ops.iter().filter(|o| o.actor == Actor::RemoteScada).count();
            writeln!(f, "  form {} ({}): {} ops, {} remote", form.id, form.line_group, form.ops.len(), remote)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energization::compute_energization;
    use crate::topology::{DeviceKind, SourceKind, TopologyBuilder};

    /// s ─B1─ a ─M1─ c ══t══ d, box grounds at both ends of t.
    fn dead_end() -> NetworkTopology {
        let mut b = TopologyBuilder::new();
        b.zone("Z").track("1");
        b.node("s", "Z", 0).node("a", "Z", 0).node("c", "Z", 0).node("d", "Z", 4000);
        b.source("S1", SourceKind::SupplySubstation, "s");
        b.simple_device("B1", DeviceKind::Breaker, "s", "a");
        b.simple_device("M1", DeviceKind::Mod, "a", "c");
        b.trolley("t", "1", "c", "d", 0, 4000);
        b.ground("Gc", GroundKind::Box, "c").ground("Gd", GroundKind::Box, "d");
        b.build().unwrap()
    }

    fn ops(plan: &IsolationPlan) -> Vec<String> {
        plan.isolation_sequence().iter().map(|o| format!("{} {}", o.kind, o.target)).collect()
    }

    #[test]
    fn minimal_dead_end_plan() {
        let topo = dead_end();
        let s0 = SwitchingState::normal(&topo);
        let plan = plan_isolation(&topo, &s0, &IsolationRequest::new("R", ["t"])).unwrap();
        assert_eq!(
            ops(&plan),
            [
                "open B1",
                "open M1",
                "tag M1",
                "close B1",
                "test_potential Gc",
                "apply_ground Gc",
                "test_potential Gd",
                "apply_ground Gd"
            ]
        );
        assert!(plan.exact);
        assert_eq!(plan.predicted_counts.0, plan.predicted_counts.1);
        let restore: Vec<String> =
            plan.restore_sequence().iter().map(|o| format!("{} {}", o.kind, o.target)).collect();
        assert_eq!(restore[0], "apply_ground Gd".replace("apply", "remove"));
        assert_eq!(restore.last().unwrap(), "close B1");
    }

    #[test]
    fn plan_executes_prefix_safe_and_restores() {
        let topo = dead_end();
        let s0 = SwitchingState::normal(&topo);
        let plan = plan_isolation(&topo, &s0, &IsolationRequest::new("R", ["t"])).unwrap();
        let mut forms = plan.forms.clone();
        let mut state = s0.clone();
        for op in plan.isolation_sequence() {
            let form = forms.iter_mut().find(|f| f.id == op.order_ref).unwrap();
            state = form.step(&topo, &state, &PersonId::new("PD1"), 0, 0).unwrap();
            assert_eq!(compute_energization(&topo, &state).unwrap().safety_violations().count(), 0);
        }
        let e = compute_energization(&topo, &state).unwrap();
        assert!(e.energized.contains("a"));
        assert!(e.grounded.contains("c") && e.grounded.contains("d"));
        let mut forms = plan.restore_forms.clone();
        for op in plan.restore_sequence() {
            let form = forms.iter_mut().find(|f| f.id == op.order_ref).unwrap();
            state = form.step(&topo, &state, &PersonId::new("PD1"), 0, 0).unwrap();
        }
        assert_eq!(state, s0);
    }

    #[test]
    fn source_in_target_and_empty_request() {
        let topo = dead_end();
        let s0 = SwitchingState::normal(&topo);
        assert_eq!(
            plan_isolation(&topo, &s0, &IsolationRequest::new("R", Vec::<SectionId>::new())).unwrap_err(),
            PlanError::EmptyTarget
        );
    }

    #[test]
    fn long_request_is_split() {
        let mut b = TopologyBuilder::new();
        b.zone("Z").track("1");
        for i in 0..5 {
            b.node(format!("n{i}a"), "Z", i * 4000).node(format!("n{i}b"), "Z", (i + 1) * 4000);
            b.trolley(format!("s{i}"), "1", format!("n{i}a"), format!("n{i}b"), i * 4000, (i + 1) * 4000);
        }
        let topo = b.build().unwrap();
        let s0 = SwitchingState::normal(&topo);
        let req = IsolationRequest::new("R", ["s0", "s1", "s2", "s3"]);
        match plan_isolation(&topo, &s0, &req).unwrap_err() {
            PlanError::SpanExceeded { span_ft, suggestion, .. } => {
                assert_eq!(span_ft, 16_000);
                assert_eq!(suggestion.len(), 2);
                assert!(suggestion.iter().all(|p| p.span_ft() <= MAX_WORK_ZONE_FT));
            }
            e => panic!("unexpected {e}"),
        }
    }
}
