//! A simulated control room: one network, its live switching state, the
//! operating orders being worked, POPS sessions, and an append-only event log
//! from which the state can be rebuilt.
//!
//! Every state change appends exactly one event. Event lines read
//! `seq=<n> kind=<k> key=value ...`; the log opens with one `initial` event
//! per way the starting state differs from the network's normal condition,
//! then `room_opened`.
//!
//! Safety couplings enforced on top of the interlocks:
//! - isolation ops are stepped in the plan's global sequence order across forms;
//! - when the plan has a plate order, isolation ops need its POPS session
//!   InEffect, restore ops need ReleaseRequested (the work is done and the
//!   director has asked for release), and the dispatcher may only `release`
//!   once every restore form is complete.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::energization::{compute_energization, EnergizationResult};
use crate::ids::*;
use crate::plate_orders::{next_state, PopsError, PopsEvent, PopsSession, PopsState, PopsTransition, Role};
use crate::records::{quote, tokenize, DocumentError};
use crate::state::{StateError, SwitchingState, Tag};
use crate::switching::{
    apply_op, plan_isolation_with, request_shared_control, Actor, IsolationPlan, IsolationRequest, OpContext, OpKind,
    OperatingOrder, PlanError, PlanOptions, SharedControlError, StepError, SwitchOp,
};
use crate::timeline::DurationModel;
use crate::topology::NetworkTopology;

/// One line of the event log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomEvent {
    pub seq: u64,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl RoomEvent {
    pub fn field(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn parse(line: &str) -> Result<RoomEvent, DocumentError> {
        let (mut seq, mut kind, mut fields) = (None, None, Vec::new());
        for tok in tokenize(1, line)? {
            let (k, v) = tok
                .text
                .split_once('=')
                .ok_or_else(|| DocumentError::new(1, format!("event field `{}` is not key=value", tok.text)))?;
            match k {
                "seq" => seq = Some(v.parse().map_err(|_| DocumentError::new(1, format!("bad seq `{v}`")))?),
                "kind" => kind = Some(v.to_owned()),
                _ => fields.push((k.to_owned(), v.to_owned())),
            }
        }
        match (seq, kind) {
            (Some(seq), Some(kind)) => Ok(RoomEvent { seq, kind, fields }),
            _ => Err(DocumentError::new(1, "event needs seq= and kind=")),
        }
    }
}

impl fmt::Display for RoomEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq={} kind={}", self.seq, self.kind)?;
        for (k, v) in &self.fields {
            if v.is_empty() || v.contains(char::is_whitespace) || v.contains('"') || v.contains('#') {
                // Quote the whole token so the `=` stays inside it.
                write!(f, " {}", quote(&format!("{k}={v}")))?;
            } else {
                write!(f, " {k}={v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RoomError {
    #[error("unknown order `{0}`")]
    UnknownOrder(String),
    #[error("unknown POPS session `{0}`")]
    UnknownSession(String),
    #[error("isolation request `{0}` already planned in this room")]
    DuplicateRequest(RequestId),
    #[error("order `{0}` already exists in this room")]
    DuplicateOrder(OrderId),
    #[error("{0}")]
    Plan(#[from] PlanError),
    #[error("{0}")]
    Step(#[from] StepError),
    #[error("{0}")]
    Pops(#[from] PopsError),
    #[error("{0}")]
    Shared(#[from] SharedControlError),
    #[error("{event} is a {needed} event; caller acts as {actual}")]
    WrongRole { event: PopsEvent, needed: Role, actual: Role },
    #[error("{code}: {detail}")]
    Coupling { code: &'static str, detail: String },
    #[error("{0}")]
    State(#[from] StateError),
}

impl RoomError {
    pub fn code(&self) -> &'static str {
        match self {
            RoomError::UnknownOrder(_) => "UNKNOWN_ORDER",
            RoomError::UnknownSession(_) => "UNKNOWN_SESSION",
            RoomError::DuplicateRequest(_) => "DUPLICATE_REQUEST",
            RoomError::DuplicateOrder(_) => "DUPLICATE_ORDER",
            RoomError::Plan(e) => e.code(),
            RoomError::Step(e) => e.code(),
            RoomError::Pops(e) => e.code(),
            RoomError::Shared(_) => "SHARED_CONTROL",
            RoomError::WrongRole { .. } => "WRONG_ROLE",
            RoomError::Coupling { code, .. } => code,
            RoomError::State(_) => "INVALID_STATE",
        }
    }

    pub fn participants(&self) -> Vec<String> {
        match self {
            RoomError::Step(e) => e.participants(),
            RoomError::Plan(PlanError::CannotDeenergize { participants, .. }) => participants.clone(),
            _ => Vec::new(),
        }
    }
}

/// The orders and POPS session created for one isolation request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoomIsolation {
    pub request: RequestId,
    pub orders: Vec<OrderId>,
    pub restore_orders: Vec<OrderId>,
    pub plate_order: Option<PlateOrderId>,
    /// POPS session id (the request id) when there is a plate order.
    pub pops: Option<String>,
}

/// What one successful step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub order: OrderId,
    pub op: SwitchOp,
    /// `ok`, or `dead`/`live` for a test for potential.
    pub result: String,
    pub order_complete: bool,
    pub event_seq: u64,
}

#[derive(Clone, Debug)]
pub struct ControlRoom {
    pub name: String,
    topology: Arc<NetworkTopology>,
    state: SwitchingState,
    orders: BTreeMap<OrderId, OperatingOrder>,
    isolations: BTreeMap<RequestId, RoomIsolation>,
    sessions: BTreeMap<String, PopsSession>,
    events: Vec<RoomEvent>,
    /// Simulation seconds; advanced by each op's expected duration.
    clock: u64,
    durations: DurationModel,
    pub dispatcher: PersonId,
}

impl ControlRoom {
    pub fn new(name: impl Into<String>, topology: Arc<NetworkTopology>, state: SwitchingState) -> Result<Self, RoomError> {
        state.check(&topology)?;
        let mut room = ControlRoom {
            name: name.into(),
            topology,
            state,
            orders: BTreeMap::new(),
            isolations: BTreeMap::new(),
            sessions: BTreeMap::new(),
            events: Vec::new(),
            clock: 0,
            durations: DurationModel::default(),
            dispatcher: PersonId::new("TD1"),
        };
        for fields in initial_records(&room.topology, &room.state) {
            room.emit("initial", fields);
        }
        let opened = vec![("room", room.name.clone()), ("devices", room.topology.devices().len().to_string())];
        room.emit("room_opened", opened);
        Ok(room)
    }

    fn emit(&mut self, kind: &str, fields: Vec<(&str, String)>) -> u64 {
        let seq = self.events.len() as u64 + 1;
        self.events.push(RoomEvent {
            seq,
            kind: kind.to_owned(),
            fields: fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect(),
        });
        seq
    }

    pub fn topology(&self) -> &Arc<NetworkTopology> {
        &self.topology
    }

    pub fn state(&self) -> &SwitchingState {
        &self.state
    }

    pub fn energization(&self) -> EnergizationResult {
        compute_energization(&self.topology, &self.state).expect("room state is checked against its topology")
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn events(&self) -> &[RoomEvent] {
        &self.events
    }

    /// Events with `seq > since`.
    pub fn events_since(&self, since: u64) -> &[RoomEvent] {
        let start = (since as usize).min(self.events.len());
        &self.events[start..]
    }

    pub fn last_seq(&self) -> u64 {
        self.events.len() as u64
    }

    pub fn orders(&self) -> impl Iterator<Item = &OperatingOrder> {
        self.orders.values()
    }

    pub fn order(&self, id: &str) -> Option<&OperatingOrder> {
        self.orders.get(id)
    }

    pub fn isolations(&self) -> impl Iterator<Item = &RoomIsolation> {
        self.isolations.values()
    }

    pub fn session(&self, id: &str) -> Option<&PopsSession> {
        self.sessions.get(id)
    }

    pub fn sessions(&self) -> impl Iterator<Item = (&String, &PopsSession)> {
        self.sessions.iter()
    }

    /// Directors named on any order in this room.
    pub fn directors(&self) -> BTreeSet<PersonId> {
        self.orders.values().map(|o| o.director.clone()).collect()
    }

    /// Plans `request` against the current state and files its forms.
    pub fn plan_isolation(&mut self, request: &IsolationRequest, options: &PlanOptions) -> Result<(IsolationPlan, RoomIsolation), RoomError> {
        if self.isolations.contains_key(&request.id) {
            return Err(RoomError::DuplicateRequest(request.id.clone()));
        }
        let plan = plan_isolation_with(&self.topology, &self.state, request, options)?;
        let entry = RoomIsolation {
            request: request.id.clone(),
            orders: plan.forms.iter().map(|f| f.id.clone()).collect(),
            restore_orders: plan.restore_forms.iter().map(|f| f.id.clone()).collect(),
            plate_order: plan.plate_order.clone(),
            pops: plan.plate_order.as_ref().map(|_| request.id.to_string()),
        };
        for f in plan.forms.iter().chain(&plan.restore_forms) {
            self.orders.insert(f.id.clone(), f.clone());
        }
        if let (Some(p), Some(sid)) = (&plan.plate_order, &entry.pops) {
            self.sessions.insert(sid.clone(), PopsSession::new(p.clone(), options.director.clone(), self.dispatcher.clone()));
        }
        let ids = |v: &[OrderId]| v.iter().map(|o| o.as_str()).collect::<Vec<_>>().join(",");
        self.emit(
            "isolation_planned",
            vec![
                ("request", request.id.to_string()),
                ("orders", ids(&entry.orders)),
                ("restore", ids(&entry.restore_orders)),
                ("plate_order", plan.plate_order.as_ref().map_or("none".into(), |p| p.to_string())),
                ("ops", plan.predicted_counts.0.to_string()),
            ],
        );
        self.isolations.insert(request.id.clone(), entry.clone());
        Ok((plan, entry))
    }

    /// Files a hand-written operating order. It belongs to no isolation, so
    /// only the interlocks (not the sequence or POPS couplings) guard its ops.
    pub fn file_order(&mut self, mut order: OperatingOrder) -> Result<u64, RoomError> {
        if self.orders.contains_key(&order.id) {
            return Err(RoomError::DuplicateOrder(order.id));
        }
        order.request = None;
        for op in &mut order.ops {
            op.order_ref = order.id.clone();
        }
        let fields = vec![
            ("order", order.id.to_string()),
            ("director", order.director.to_string()),
            ("ops", order.ops.len().to_string()),
        ];
        self.orders.insert(order.id.clone(), order);
        Ok(self.emit("order_filed", fields))
    }

    fn isolation_of(&self, order: &OperatingOrder) -> Option<&RoomIsolation> {
        order.request.as_ref().and_then(|r| self.isolations.get(r))
    }

    /// Lowest unexecuted seq across the given orders.
    fn next_global_seq(&self, ids: &[OrderId]) -> Option<u32> {
        ids.iter().filter_map(|id| self.orders.get(id)?.next_op().map(|o| o.seq)).min()
    }

    fn all_complete(&self, ids: &[OrderId]) -> bool {
        ids.iter().all(|id| self.orders.get(id).is_none_or(|o| o.is_complete()))
    }

    fn check_coupling(&self, order: &OperatingOrder) -> Result<(), RoomError> {
        let Some(op) = order.next_op() else { return Ok(()) };
        let Some(iso) = self.isolation_of(order) else { return Ok(()) };
        let restoring = iso.restore_orders.contains(&order.id);
        let group = if restoring { &iso.restore_orders } else { &iso.orders };
        if restoring && !self.all_complete(&iso.orders) {
            return Err(RoomError::Coupling {
                code: "ISOLATION_INCOMPLETE",
                detail: format!("restore of {} waits for every isolation form", iso.request),
            });
        }
        if let Some(next) = self.next_global_seq(group) {
            if op.seq != next {
                return Err(RoomError::Coupling {
                    code: "OUT_OF_SEQUENCE",
                    detail: format!("op {} of {} is not next; op {next} must be commanded first", op.seq, order.id),
                });
            }
        }
        if let Some(sid) = &iso.pops {
            let state = self.sessions[sid].state;
            let needed = if restoring { PopsState::ReleaseRequested } else { PopsState::InEffect };
            if state != needed {
                return Err(RoomError::Coupling {
                    code: if restoring { "POPS_NOT_RELEASE_REQUESTED" } else { "POPS_NOT_IN_EFFECT" },
                    detail: format!("plate order session {sid} is {state}, needs {needed}"),
                });
            }
        }
        Ok(())
    }

    fn op_duration_s(&self, op: &SwitchOp) -> u64 {
        match op.actor {
            Actor::RemoteScada => self.durations.expected_remote_s() as u64,
            Actor::FieldLineman => {
                let travel = self.topology.device(&op.target).map_or(0, |d| d.travel_minutes);
                self.durations.expected_manual_s(travel) as u64
            }
        }
    }

    /// Validates and executes the next op of `order_id` as director `who`.
    /// A rejection changes nothing.
    pub fn step(&mut self, order_id: &str, who: &PersonId) -> Result<StepReport, RoomError> {
        let order = self.orders.get(order_id).ok_or_else(|| RoomError::UnknownOrder(order_id.to_owned()))?;
        let op = order.next_op().cloned().ok_or_else(|| StepError::Complete(order.id.clone()))?;
        self.check_coupling(order)?;
        let duration = self.op_duration_s(&op);
        let now = self.clock + duration;
        let mut order = order.clone();
        let before = order.records.len();
        let next = order.step(&self.topology, &self.state, who, now, duration)?;
        let result = order.records[before].result.clone();
        self.state = next;
        self.clock = now;
        let complete = order.is_complete();
        let authority = order.director.to_string();
        self.orders.insert(order.id.clone(), order);
        let seq = self.emit(
            "op_executed",
            vec![
                ("order", order_id.to_owned()),
                ("op", op.seq.to_string()),
                ("op_kind", op.kind.to_string()),
                ("target", op.target.clone()),
                ("actor", op.actor.to_string()),
                ("who", who.to_string()),
                ("authority", authority),
                ("at", now.to_string()),
                ("result", result.clone()),
            ],
        );
        Ok(StepReport { order: OrderId::new(order_id), op, result, order_complete: complete, event_seq: seq })
    }

    /// Double-header confirmation of the next op by `who`.
    pub fn confirm(&mut self, order_id: &str, who: &PersonId) -> Result<u64, RoomError> {
        let order = self.orders.get_mut(order_id).ok_or_else(|| RoomError::UnknownOrder(order_id.to_owned()))?;
        order.confirm(who)?;
        let seq = order.next_op().map(|o| o.seq).unwrap_or_default();
        Ok(self.emit("confirmed", vec![("order", order_id.to_owned()), ("op", seq.to_string()), ("who", who.to_string())]))
    }

    /// Puts an order under shared control with `second`, whose orders may
    /// live in other rooms (`foreign_orders`).
    pub fn share(&mut self, order_id: &str, second: &PersonId, foreign_orders: &[OperatingOrder]) -> Result<u64, RoomError> {
        let order = self.orders.get(order_id).ok_or_else(|| RoomError::UnknownOrder(order_id.to_owned()))?;
        let mut all: Vec<OperatingOrder> = self.orders.values().cloned().collect();
        all.extend(foreign_orders.iter().cloned());
        let mut known = self.directors();
        known.extend(foreign_orders.iter().map(|o| o.director.clone()));
        let updated = request_shared_control(order, second, &all, &known)?;
        let shared = updated.shared_targets.iter().cloned().collect::<Vec<_>>().join(",");
        self.orders.insert(updated.id.clone(), updated);
        Ok(self.emit(
            "shared_control",
            vec![("order", order_id.to_owned()), ("with", second.to_string()), ("targets", shared)],
        ))
    }

    /// Applies a POPS event on behalf of `role`.
    pub fn pops_event(&mut self, session_id: &str, event: PopsEvent, role: Role, who: &PersonId) -> Result<PopsTransition, RoomError> {
        let session = self.sessions.get(session_id).ok_or_else(|| RoomError::UnknownSession(session_id.to_owned()))?;
        if let Some(needed) = event.role() {
            if needed != role {
                return Err(RoomError::WrongRole { event, needed, actual: role });
            }
        }
        if next_state(session.state, event).is_none() {
            return Err(PopsError::IllegalTransition { state: session.state, event }.into());
        }
        // Asking for the release early would strand the isolation: its
        // remaining ops need the plate order in effect.
        if event == PopsEvent::RequestRelease {
            if let Some(iso) = self.isolations.get(session_id) {
                if !self.all_complete(&iso.orders) {
                    return Err(RoomError::Coupling {
                        code: "ISOLATION_INCOMPLETE",
                        detail: format!("release of {session_id} may be requested once every isolation form completes"),
                    });
                }
            }
        }
        if event == PopsEvent::Release {
            if let Some(iso) = self.isolations.get(session_id) {
                if !self.all_complete(&iso.restore_orders) {
                    return Err(RoomError::Coupling {
                        code: "RESTORE_INCOMPLETE",
                        detail: format!("trains may not return to {session_id} before every restore form completes"),
                    });
                }
            }
        }
        let mut session = session.clone();
        session.apply(event, self.clock)?;
        let t = session.log.last().cloned().expect("apply logs the transition");
        self.sessions.insert(session_id.to_owned(), session);
        self.emit(
            "pops",
            vec![
                ("session", session_id.to_owned()),
                ("event", event.to_string()),
                ("from", t.from.to_string()),
                ("to", t.to.to_string()),
                ("role", role.to_string()),
                ("who", who.to_string()),
                ("at", t.at.to_string()),
            ],
        );
        Ok(t)
    }

    /// Text record form of the live state plus its energization partition.
    pub fn state_document(&self) -> String {
        let e = self.energization();
        let mut out = self.state.to_document(&self.topology);
        let join = |s: &BTreeSet<NodeId>| s.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" ");
        out.push_str(&format!("energized: {}\n", join(&e.energized)));
        out.push_str(&format!("dead: {}\n", join(&e.dead)));
        out.push_str(&format!("grounded: {}\n", join(&e.grounded)));
        for v in &e.violations {
            out.push_str(&format!("violation: {} {}\n", v.kind.code(), v.participants.join(",")));
        }
        out.push_str(&format!("seq: {}\n", self.last_seq()));
        out
    }
}

/// How `state` differs from the normal condition, one event body per item.
fn initial_records(topology: &NetworkTopology, state: &SwitchingState) -> Vec<Vec<(&'static str, String)>> {
    let normal = SwitchingState::normal(topology);
    let mut out = Vec::new();
    for (d, p) in &state.positions {
        if normal.position(d) != *p {
            out.push(vec![("record", "position".into()), ("device", d.to_string()), ("position", p.to_string())]);
        }
    }
    for g in &state.applied_grounds {
        out.push(vec![("record", "ground".into()), ("ground", g.to_string())]);
    }
    for s in normal.sources_in_service.difference(&state.sources_in_service) {
        out.push(vec![("record", "out_of_service".into()), ("source", s.to_string())]);
    }
    for (t, tag) in &state.tags {
        out.push(vec![
            ("record", "tag".into()),
            ("target", t.clone()),
            ("authority", tag.authority.to_string()),
            ("reason", tag.reason.clone()),
            ("at", tag.timestamp.to_string()),
        ]);
    }
    for (a, b) in &state.pantograph_bridges {
        out.push(vec![("record", "bridge".into()), ("a", a.to_string()), ("b", b.to_string())]);
    }
    out
}

/// Rebuilds a state by folding an event log: `initial` records over the
/// normal state, then every `op_executed` through the op semantics.
pub fn fold_events(topology: &NetworkTopology, events: &[RoomEvent]) -> Result<SwitchingState, String> {
    let mut state = SwitchingState::normal(topology);
    for e in events {
        let get = |k: &str| e.field(k).ok_or_else(|| format!("event {} lacks {k}", e.seq));
        match e.kind.as_str() {
            "initial" => match get("record")? {
                "position" => state.set_position(DeviceId::new(get("device")?), get("position")?.parse()?),
                "ground" => {
                    state.applied_grounds.insert(GroundId::new(get("ground")?));
                }
                "out_of_service" => {
                    state.sources_in_service.remove(get("source")?);
                }
                "tag" => {
                    let tag = Tag {
                        authority: PersonId::new(get("authority")?),
                        reason: get("reason")?.to_owned(),
                        timestamp: get("at")?.parse().map_err(|_| format!("event {} has a bad at=", e.seq))?,
                    };
                    state.tags.insert(get("target")?.to_owned(), tag);
                }
                "bridge" => {
                    state.pantograph_bridges.insert((NodeId::new(get("a")?), NodeId::new(get("b")?)));
                }
                other => return Err(format!("event {}: unknown initial record `{other}`", e.seq)),
            },
            "op_executed" => {
                let kind: OpKind = get("op_kind")?.parse()?;
                let actor: Actor = get("actor")?.parse()?;
                let mut op = SwitchOp::new(kind, get("target")?, actor);
                op.order_ref = OrderId::new(get("order")?);
                let mut ctx = OpContext::new(get("authority")?);
                ctx.now = get("at")?.parse().map_err(|_| format!("event {} has a bad at=", e.seq))?;
                state = apply_op(topology, &state, &op, &ctx).0;
            }
            _ => {}
        }
    }
    Ok(state)
}
