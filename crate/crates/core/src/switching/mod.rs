//! Switching operations, machine interlocks, isolation planning and
//! operating-order forms.

mod order;
mod planner;
mod request;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::energization::LiveGraph;
use crate::ids::*;
use crate::state::{Position, SwitchingState, Tag};
use crate::topology::{Control, DeviceKind, NetworkTopology};

pub use order::{
    parse_orders, request_shared_control, OpRecord, OperatingOrder, OrderPhase, SharedControlError, StepError,
};
pub use planner::{
    plan_isolation, plan_isolation_with, split_suggestion, IsolationPlan, PlanError, PlanOptions, SplitPart,
    MAX_WORK_ZONE_FT,
};
pub use request::{parse_requests, IsolationRequest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Open,
    Close,
    RackOut,
    RackIn,
    ApplyGround,
    RemoveGround,
    Tag,
    Untag,
    TestPotential,
}

impl OpKind {
    /// The operation that undoes this one. Testing for potential is its own inverse.
    pub fn inverse(self) -> OpKind {
        match self {
            OpKind::Open => OpKind::Close,
            OpKind::Close => OpKind::Open,
            OpKind::RackOut => OpKind::RackIn,
            OpKind::RackIn => OpKind::RackOut,
            OpKind::ApplyGround => OpKind::RemoveGround,
            OpKind::RemoveGround => OpKind::ApplyGround,
            OpKind::Tag => OpKind::Untag,
            OpKind::Untag => OpKind::Tag,
            OpKind::TestPotential => OpKind::TestPotential,
        }
    }

    pub fn targets_ground(self) -> bool {
        matches!(self, OpKind::ApplyGround | OpKind::RemoveGround | OpKind::TestPotential)
    }

    pub fn changes_position(self) -> bool {
        matches!(self, OpKind::Open | OpKind::Close | OpKind::RackOut | OpKind::RackIn)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Open => "open",
            OpKind::Close => "close",
            OpKind::RackOut => "rack_out",
            OpKind::RackIn => "rack_in",
            OpKind::ApplyGround => "apply_ground",
            OpKind::RemoveGround => "remove_ground",
            OpKind::Tag => "tag",
            OpKind::Untag => "untag",
            OpKind::TestPotential => "test_potential",
        })
    }
}

impl FromStr for OpKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "open" => OpKind::Open,
            "close" => OpKind::Close,
            "rack_out" => OpKind::RackOut,
            "rack_in" => OpKind::RackIn,
            "apply_ground" => OpKind::ApplyGround,
            "remove_ground" => OpKind::RemoveGround,
            "tag" => OpKind::Tag,
            "untag" => OpKind::Untag,
            "test_potential" => OpKind::TestPotential,
            other => return Err(format!("unknown op kind `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Actor {
    RemoteScada,
    FieldLineman,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Actor::RemoteScada => "remote_scada",
            Actor::FieldLineman => "field_lineman",
        })
    }
}

impl FromStr for Actor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "remote_scada" | "remote" => Actor::RemoteScada,
            "field_lineman" | "field" => Actor::FieldLineman,
            other => return Err(format!("unknown actor `{other}`")),
        })
    }
}

/// One commanded operation on a device or ground point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SwitchOp {
    /// Position in the plan (shared numbering across all forms of a plan).
    pub seq: u32,
    pub kind: OpKind,
    /// Device id, or ground-point id for ground and test operations.
    pub target: String,
    pub actor: Actor,
    pub order_ref: OrderId,
    /// Which of the eight isolation steps produced the op (0 when hand written).
    pub step: u8,
}

impl SwitchOp {
    pub fn new(kind: OpKind, target: impl Into<String>, actor: Actor) -> Self {
        Self { seq: 0, kind, target: target.into(), actor, order_ref: OrderId::new(""), step: 0 }
    }

    /// The default actor for `kind` on `target`: SCADA for remote-controlled
    /// devices, a lineman for everything done by hand in the field.
    pub fn actor_for(topology: &NetworkTopology, kind: OpKind, target: &str) -> Actor {
        if kind.targets_ground() || matches!(kind, OpKind::RackOut | OpKind::RackIn) {
            return Actor::FieldLineman;
        }
        match topology.device(target) {
            Some(d) if d.control == Control::Remote => Actor::RemoteScada,
            _ => Actor::FieldLineman,
        }
    }

    pub fn inverse(&self) -> SwitchOp {
        SwitchOp { kind: self.kind.inverse(), ..self.clone() }
    }
}

impl fmt::Display for SwitchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.seq, self.kind, self.target, self.actor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InterlockKind {
    Tagged,
    LiveClose,
    LoadOpen,
    HotGround,
    PhaseClose,
    RackClosed,
    /// Structurally meaningless op: wrong target type, device already in the
    /// commanded position, racking a non-rackable device, and so on.
    InvalidOp,
}

impl InterlockKind {
    pub fn code(self) -> &'static str {
        match self {
            InterlockKind::Tagged => "TAGGED",
            InterlockKind::LiveClose => "LIVE_CLOSE",
            InterlockKind::LoadOpen => "LOAD_OPEN",
            InterlockKind::HotGround => "HOT_GROUND",
            InterlockKind::PhaseClose => "PHASE_CLOSE",
            InterlockKind::RackClosed => "RACK_CLOSED",
            InterlockKind::InvalidOp => "INVALID_OP",
        }
    }
}

impl fmt::Display for InterlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind}: {detail} [{}]", participants.join(","))]
pub struct InterlockError {
    pub kind: InterlockKind,
    pub participants: Vec<String>,
    pub detail: String,
}

impl InterlockError {
    fn new(kind: InterlockKind, participants: Vec<String>, detail: impl Into<String>) -> Self {
        Self { kind, participants, detail: detail.into() }
    }
}

/// What the interlocks need to know beyond the network state.
#[derive(Clone, Debug, Default)]
pub struct OpContext {
    /// The Power Director commanding the op.
    pub director: PersonId,
    /// Nodes a completed test_potential in this order found dead.
    pub tested_dead: BTreeSet<NodeId>,
    /// Whether apply_ground demands a covering test record. The bounded
    /// search oracle and simulations of manual practice switch this off.
    pub require_test: bool,
    /// Simulation time stamped on tags.
    pub now: u64,
}

impl OpContext {
    pub fn new(director: impl Into<PersonId>) -> Self {
        Self { director: director.into(), tested_dead: BTreeSet::new(), require_test: true, now: 0 }
    }
}

/// Outcome of executing one op.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpOutcome {
    Done,
    /// test_potential found the point dead; the nodes its test covers.
    TestedDead(BTreeSet<NodeId>),
    TestedLive,
}

impl OpOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            OpOutcome::Done => "ok",
            OpOutcome::TestedDead(_) => "dead",
            OpOutcome::TestedLive => "live",
        }
    }
}

struct Sides {
    live: Vec<bool>,
    earthed: Vec<bool>,
    comp: Vec<usize>,
}

fn sides(topology: &NetworkTopology, state: &SwitchingState) -> Sides {
    let ix = topology.index();
    let graph = LiveGraph::build(topology, state, true);
    Sides {
        live: graph.reach(state.sources_in_service.iter().map(|s| ix.source_nodes[s])),
        earthed: graph.reach(state.applied_grounds.iter().map(|g| ix.ground_nodes[g])),
        comp: graph.components(),
    }
}

/// Check one op against every machine interlock. Does not change anything.
pub fn validate_op(
    topology: &NetworkTopology,
    state: &SwitchingState,
    op: &SwitchOp,
    ctx: &OpContext,
) -> Result<(), InterlockError> {
    use InterlockKind as K;
    let target = op.target.as_str();
    let invalid = |detail: String| Err(InterlockError::new(K::InvalidOp, vec![target.to_owned()], detail));

    if op.kind.targets_ground() {
        if topology.ground_point(target).is_none() {
            return invalid(format!("{} needs a ground point, `{target}` is not one", op.kind));
        }
    } else if op.kind != OpKind::Tag && op.kind != OpKind::Untag && topology.device(target).is_none() {
        return invalid(format!("{} needs a device, `{target}` is not one", op.kind));
    } else if topology.device(target).is_none() && topology.ground_point(target).is_none() {
        return invalid(format!("unknown tag target `{target}`"));
    }

    if let Some(tag) = state.tags.get(target) {
        if tag.authority != ctx.director {
            return Err(InterlockError::new(
                K::Tagged,
                vec![target.to_owned(), tag.authority.to_string()],
                format!("tagged by {}: {}", tag.authority, tag.reason),
            ));
        }
        if op.kind.changes_position() || op.kind == OpKind::Tag {
            return Err(InterlockError::new(
                K::Tagged,
                vec![target.to_owned(), tag.authority.to_string()],
                "remove the tag before operating the device",
            ));
        }
    }

    let ix = topology.index();
    match op.kind {
        OpKind::Tag | OpKind::TestPotential => Ok(()),
        OpKind::Untag => {
            if state.tags.contains_key(target) {
                Ok(())
            } else {
                invalid("no tag to remove".into())
            }
        }
        OpKind::Open => {
            let device = topology.device(target).expect("checked above");
            if state.position(&device.id) != Position::Closed {
                return invalid("device is not closed".into());
            }
            if !device.load_break {
                let s = sides(topology, state);
                let (a, b) = ix.device_ends[&device.id];
                if s.live[a] && s.live[b] {
                    return Err(InterlockError::new(
                        K::LoadOpen,
                        vec![target.to_owned(), device.terminals.0.to_string(), device.terminals.1.to_string()],
                        format!("{} cannot be opened under load", device.kind),
                    ));
                }
            }
            Ok(())
        }
        OpKind::Close => {
            let device = topology.device(target).expect("checked above");
            match state.position(&device.id) {
                Position::Closed => return invalid("device is already closed".into()),
                Position::RackedOut => return invalid("device is racked out".into()),
                Position::Open => {}
            }
            let s = sides(topology, state);
            let (a, b) = ix.device_ends[&device.id];
            if s.comp[a] != s.comp[b] {
                if (s.live[a] && s.earthed[b]) || (s.live[b] && s.earthed[a]) {
                    return Err(InterlockError::new(
                        K::LiveClose,
                        vec![target.to_owned(), device.terminals.0.to_string(), device.terminals.1.to_string()],
                        "closing would connect an energized circuit to a grounded one",
                    ));
                }
                let zones_of = |c: usize| -> BTreeSet<&ZoneId> {
                    state
                        .sources_in_service
                        .iter()
                        .filter(|src| s.comp[ix.source_nodes[*src]] == c)
                        .map(|src| &topology.sources()[src].zone)
                        .collect()
                };
                let (za, zb) = (zones_of(s.comp[a]), zones_of(s.comp[b]));
                if !za.is_empty() && !zb.is_empty() && za.union(&zb).count() > 1 {
                    let mut parts = vec![target.to_owned()];
                    parts.extend(za.union(&zb).map(|z| z.to_string()));
                    return Err(InterlockError::new(
                        K::PhaseClose,
                        parts,
                        "closing would tie two utility phase zones together",
                    ));
                }
            }
            Ok(())
        }
        OpKind::RackOut => {
            let device = topology.device(target).expect("checked above");
            if !device.rackable || device.kind != DeviceKind::Breaker {
                return invalid("device is not a rackable breaker".into());
            }
            match state.position(&device.id) {
                Position::Closed => Err(InterlockError::new(
                    K::RackClosed,
                    vec![target.to_owned()],
                    "a closed breaker cannot be racked out",
                )),
                Position::RackedOut => invalid("breaker is already racked out".into()),
                Position::Open => Ok(()),
            }
        }
        OpKind::RackIn => {
            let device = topology.device(target).expect("checked above");
            if state.position(&device.id) != Position::RackedOut {
                return invalid("breaker is not racked out".into());
            }
            Ok(())
        }
        OpKind::ApplyGround => {
            let g = topology.ground_point(target).expect("checked above");
            if state.applied_grounds.contains(&g.id) {
                return invalid("ground already applied".into());
            }
            let s = sides(topology, state);
            if s.live[ix.ground_nodes[&g.id]] {
                return Err(InterlockError::new(
                    K::HotGround,
                    vec![target.to_owned(), g.node.to_string()],
                    "ground point is energized",
                ));
            }
            if ctx.require_test && !ctx.tested_dead.contains(&g.node) {
                return Err(InterlockError::new(
                    K::HotGround,
                    vec![target.to_owned(), g.node.to_string()],
                    "no completed test for potential shows this point dead",
                ));
            }
            Ok(())
        }
        OpKind::RemoveGround => {
            if state.applied_grounds.contains(target) {
                Ok(())
            } else {
                invalid("ground is not applied".into())
            }
        }
    }
}

/// Validate, then apply.
pub fn execute_op(
    topology: &NetworkTopology,
    state: &SwitchingState,
    op: &SwitchOp,
    ctx: &OpContext,
) -> Result<(SwitchingState, OpOutcome), InterlockError> {
    validate_op(topology, state, op, ctx)?;
    Ok(apply_op(topology, state, op, ctx))
}

/// Apply an op with no interlock checks (replay `--no-interlock`). Ops whose
/// target does not exist leave the state unchanged.
pub fn apply_op(
    topology: &NetworkTopology,
    state: &SwitchingState,
    op: &SwitchOp,
    ctx: &OpContext,
) -> (SwitchingState, OpOutcome) {
    let mut next = state.clone();
    let target = op.target.as_str();
    let mut outcome = OpOutcome::Done;
    match op.kind {
        OpKind::Open | OpKind::Close | OpKind::RackOut | OpKind::RackIn => {
            if let Some(d) = topology.device(target) {
                let p = match op.kind {
                    OpKind::Close => Position::Closed,
                    OpKind::RackOut => Position::RackedOut,
                    _ => Position::Open,
                };
                next.set_position(d.id.clone(), p);
            }
        }
        OpKind::ApplyGround => {
            if let Some(g) = topology.ground_point(target) {
                next.applied_grounds.insert(g.id.clone());
            }
        }
        OpKind::RemoveGround => {
            next.applied_grounds.remove(target);
        }
        OpKind::Tag => {
            next.tags.insert(
                target.to_owned(),
                Tag { authority: ctx.director.clone(), reason: format!("order {}", op.order_ref), timestamp: ctx.now },
            );
        }
        OpKind::Untag => {
            next.tags.remove(target);
        }
        OpKind::TestPotential => {
            if let Some(g) = topology.ground_point(target) {
                outcome = test_potential(topology, state, &g.node);
            }
        }
    }
    (next, outcome)
}

/// A test at a dead point proves its whole (currently connected) conductor dead.
fn test_potential(topology: &NetworkTopology, state: &SwitchingState, node: &NodeId) -> OpOutcome {
    let ix = topology.index();
    let graph = LiveGraph::build(topology, state, true);
    let live = graph.reach(state.sources_in_service.iter().map(|s| ix.source_nodes[s]));
    let at = ix.node_ix[node];
    if live[at] {
        return OpOutcome::TestedLive;
    }
    let reached = graph.reach([at]);
    OpOutcome::TestedDead(
        reached.iter().enumerate().filter(|(_, r)| **r).map(|(i, _)| ix.node_ids[i].clone()).collect(),
    )
}
