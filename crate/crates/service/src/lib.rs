//! HTTP control-room service over the traction-power isolation engine.
//!
//! One process hosts one or more [`ControlRoom`]s sharing a topology. Every
//! mutation of a room goes through that room's mutex, so steps are totally
//! ordered and each is validated against the state left by the previous one.
//! Reads take the same lock briefly and never mutate.
//!
//! Headers:
//! - `x-role: director|dispatcher` — the acting role (POPS events);
//! - `x-person: <id>` — the acting person (defaults: the order's director,
//!   or `PD1` / the room dispatcher);
//! - `x-room: <n>` — room index when serving more than one (default 0).
//!
//! Bodies are `key: value` lines; network, state, request, order and window
//! bodies use the engine's document formats. Errors answer with
//! `error: <CODE>`, `participants: <a,b,...>` and `detail: <text>`.
//!
//! | endpoint | success | errors |
//! |---|---|---|
//! | `GET /network` | 200 network document | |
//! | `GET /state` | 200 state document + energization | |
//! | `POST /isolations` | 201 order ids | 400, 409, 422 |
//! | `GET /orders/{id}` | 200 order document | 404 |
//! | `POST /orders/{id}/step` | 200 step record | 404, 409 |
//! | `POST /orders/{id}/confirm` | 200 | 404, 409 |
//! | `POST /pops/{id}/{event}` | 200 transition | 400, 404, 409 |
//! | `GET /events?since=<seq>&wait_ms=<n>` | 200 event lines | 400 |
//! | `POST /simulate?isolation=<id>&mode=expected\|sampled&seed=<n>` | 200 timeline rows | 400, 404 |

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use tokio::sync::{watch, Mutex};

use traction_isolation::ids::{OrderId, PersonId};
use traction_isolation::plate_orders::{PopsEvent, Role};
use traction_isolation::room::{ControlRoom, RoomError};
use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{parse_orders, parse_requests, OrderPhase, PlanOptions, SwitchOp};
use traction_isolation::timeline::{compose_night, parse_night_setup, phase_inputs_for, SimMode};
use traction_isolation::topology::NetworkTopology;

/// Longest a `GET /events` long-poll may wait.
pub const MAX_WAIT_MS: u64 = 30_000;

struct Room {
    room: Mutex<ControlRoom>,
    /// Last event sequence number, for long-polling readers.
    seq: watch::Sender<u64>,
}

/// Shared service state: the rooms.
#[derive(Clone)]
pub struct Service {
    rooms: Arc<Vec<Room>>,
}

impl Service {
    pub fn new(rooms: Vec<ControlRoom>) -> Self {
        let rooms = rooms
            .into_iter()
            .map(|room| {
                let (seq, _) = watch::channel(room.last_seq());
                Room { room: Mutex::new(room), seq }
            })
            .collect();
        Service { rooms: Arc::new(rooms) }
    }

    /// `count` rooms named `room0`, `room1`, ... over one topology, each
    /// starting from `state`.
    pub fn with_rooms(topology: Arc<NetworkTopology>, state: &SwitchingState, count: usize) -> Result<Self, RoomError> {
        let rooms = (0..count.max(1))
            .map(|i| ControlRoom::new(format!("room{i}"), topology.clone(), state.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Service::new(rooms))
    }

    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    /// A snapshot of one room (for tests and tools).
    pub async fn snapshot(&self, index: usize) -> Option<ControlRoom> {
        Some(self.rooms.get(index)?.room.lock().await.clone())
    }

    pub fn router(self) -> Router {
        Router::new()
            .route("/network", get(network))
            .route("/state", get(state))
            .route("/isolations", post(isolations))
            .route("/orders/{id}", get(order))
            .route("/orders/{id}/step", post(step))
            .route("/orders/{id}/confirm", post(confirm))
            .route("/pops/{id}/{event}", post(pops))
            .route("/events", get(events))
            .route("/simulate", post(simulate))
            .with_state(self)
    }
}

/// Serve `service` on an already bound listener until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, service: Service) -> std::io::Result<()> {
    axum::serve(listener, service.router()).await
}

// ---------------------------------------------------------------------------
// Responses

/// An error response: status plus `error`/`participants`/`detail` body.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: String,
    pub participants: Vec<String>,
    pub detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, detail: impl Into<String>) -> Self {
        ApiError { status, code: code.to_owned(), participants: Vec::new(), detail: detail.into() }
    }

    fn bad_request(detail: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "MALFORMED", detail)
    }
}

impl From<RoomError> for ApiError {
    fn from(e: RoomError) -> Self {
        let status = match &e {
            RoomError::UnknownOrder(_) | RoomError::UnknownSession(_) => StatusCode::NOT_FOUND,
            RoomError::Plan(_) | RoomError::State(_) => StatusCode::UNPROCESSABLE_ENTITY,
            RoomError::DuplicateRequest(_)
            | RoomError::DuplicateOrder(_)
            | RoomError::Step(_)
            | RoomError::Pops(_)
            | RoomError::Shared(_)
            | RoomError::WrongRole { .. }
            | RoomError::Coupling { .. } => StatusCode::CONFLICT,
        };
        ApiError { status, code: e.code().to_owned(), participants: e.participants(), detail: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = format!(
            "error: {}\nparticipants: {}\ndetail: {}\n",
            self.code,
            self.participants.join(","),
            self.detail.replace('\n', " ")
        );
        (self.status, body).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn records(fields: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in fields {
        let _ = writeln!(out, "{k}: {v}");
    }
    out
}

fn ok(body: String) -> ApiResult {
    Ok((StatusCode::OK, body).into_response())
}

// ---------------------------------------------------------------------------
// Request context

fn header<'a>(headers: &'a HeaderMap, name: &str) -> Result<Option<&'a str>, ApiError> {
    match headers.get(name) {
        None => Ok(None),
        Some(v) => v.to_str().map(|s| Some(s.trim())).map_err(|_| ApiError::bad_request(format!("header {name} is not text"))),
    }
}

fn room<'a>(svc: &'a Service, headers: &HeaderMap) -> Result<&'a Room, ApiError> {
    let index = match header(headers, "x-room")? {
        None => 0,
        Some(v) => v.parse::<usize>().map_err(|_| ApiError::bad_request(format!("bad x-room `{v}`")))?,
    };
    svc.rooms
        .get(index)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_ROOM", format!("no room {index}")))
}

fn person(headers: &HeaderMap) -> Result<Option<PersonId>, ApiError> {
    Ok(header(headers, "x-person")?.filter(|s| !s.is_empty()).map(PersonId::new))
}

fn role(headers: &HeaderMap) -> Result<Role, ApiError> {
    let text = header(headers, "x-role")?.ok_or_else(|| ApiError::bad_request("missing x-role header"))?;
    text.parse().map_err(ApiError::bad_request)
}

fn publish(r: &Room, room: &ControlRoom) {
    r.seq.send_replace(room.last_seq());
}

// ---------------------------------------------------------------------------
// Handlers

async fn network(State(svc): State<Service>, headers: HeaderMap) -> ApiResult {
    let r = room(&svc, &headers)?;
    let room = r.room.lock().await;
    ok(room.topology().to_document())
}

async fn state(State(svc): State<Service>, headers: HeaderMap) -> ApiResult {
    let r = room(&svc, &headers)?;
    let room = r.room.lock().await;
    ok(room.state_document())
}

/// Body: an isolation request document (planned against the live state), or
/// an operating-order document (filed as written).
async fn isolations(State(svc): State<Service>, headers: HeaderMap, body: String) -> ApiResult {
    let r = room(&svc, &headers)?;
    let first = body
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| ApiError::bad_request("empty body"))?;
    let mut room = r.room.lock().await;
    let response = if first.starts_with("order ") {
        let orders = parse_orders(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let mut ids = Vec::new();
        for order in orders {
            ids.push(order.id.to_string());
            room.file_order(order)?;
        }
        records(&[("orders", ids.join(",")), ("seq", room.last_seq().to_string())])
    } else {
        let requests = parse_requests(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let [request] = requests.as_slice() else {
            return Err(ApiError::bad_request(format!("expected one request, got {}", requests.len())));
        };
        if request.target_sections.is_empty() {
            return Err(ApiError::bad_request("request has no target sections"));
        }
        let mut options = PlanOptions::default();
        if let Some(p) = person(&headers)? {
            options.director = p;
        }
        let (plan, iso) = room.plan_isolation(request, &options)?;
        let ids = |v: &[OrderId]| v.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",");
        records(&[
            ("request", iso.request.to_string()),
            ("orders", ids(&iso.orders)),
            ("restore_orders", ids(&iso.restore_orders)),
            ("plate_order", iso.plate_order.as_ref().map_or("none".into(), |p| p.to_string())),
            ("pops", iso.pops.clone().unwrap_or_else(|| "none".into())),
            ("isolation_ops", plan.predicted_counts.0.to_string()),
            ("restore_ops", plan.predicted_counts.1.to_string()),
            ("seq", room.last_seq().to_string()),
        ])
    };
    publish(r, &room);
    Ok((StatusCode::CREATED, response).into_response())
}

async fn order(State(svc): State<Service>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult {
    let r = room(&svc, &headers)?;
    let room = r.room.lock().await;
    let order = room.order(&id).ok_or_else(|| ApiError::from(RoomError::UnknownOrder(id.clone())))?;
    ok(order.to_document())
}

async fn step(State(svc): State<Service>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult {
    let r = room(&svc, &headers)?;
    let mut room = r.room.lock().await;
    let who = match person(&headers)? {
        Some(p) => p,
        None => room.order(&id).ok_or_else(|| ApiError::from(RoomError::UnknownOrder(id.clone())))?.director.clone(),
    };
    let report = room.step(&id, &who)?;
    publish(r, &room);
    ok(records(&[
        ("order", report.order.to_string()),
        ("op", report.op.seq.to_string()),
        ("kind", report.op.kind.to_string()),
        ("target", report.op.target.clone()),
        ("actor", report.op.actor.to_string()),
        ("result", report.result),
        ("order_complete", report.order_complete.to_string()),
        ("seq", report.event_seq.to_string()),
    ]))
}

async fn confirm(State(svc): State<Service>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult {
    let r = room(&svc, &headers)?;
    let who = person(&headers)?.ok_or_else(|| ApiError::bad_request("confirmation needs x-person"))?;
    let mut room = r.room.lock().await;
    let seq = room.confirm(&id, &who)?;
    publish(r, &room);
    ok(records(&[("order", id), ("who", who.to_string()), ("seq", seq.to_string())]))
}

async fn pops(State(svc): State<Service>, headers: HeaderMap, Path((id, event)): Path<(String, String)>) -> ApiResult {
    let r = room(&svc, &headers)?;
    let event: PopsEvent = event.parse().map_err(ApiError::bad_request)?;
    let role = role(&headers)?;
    let mut room = r.room.lock().await;
    let who = match person(&headers)? {
        Some(p) => p,
        None => match role {
            Role::Dispatcher => room.dispatcher.clone(),
            Role::Director => PersonId::new("PD1"),
        },
    };
    let t = room.pops_event(&id, event, role, &who)?;
    publish(r, &room);
    ok(records(&[
        ("session", id),
        ("event", t.event.to_string()),
        ("from", t.from.to_string()),
        ("to", t.to.to_string()),
        ("seq", room.last_seq().to_string()),
    ]))
}

#[derive(serde::Deserialize, Default)]
struct EventsQuery {
    since: Option<String>,
    wait_ms: Option<String>,
}

/// Events with `seq > since`, one record per line. With `wait_ms`, waits up
/// to that long for the first new event (long-poll).
async fn events(State(svc): State<Service>, headers: HeaderMap, Query(q): Query<EventsQuery>) -> ApiResult {
    let r = room(&svc, &headers)?;
    let parse = |v: &Option<String>, what: &str| -> Result<u64, ApiError> {
        v.as_deref().map_or(Ok(0), |s| s.parse().map_err(|_| ApiError::bad_request(format!("bad {what} `{s}`"))))
    };
    let since = parse(&q.since, "since")?;
    let wait = parse(&q.wait_ms, "wait_ms")?.min(MAX_WAIT_MS);
    if wait > 0 {
        let mut rx = r.seq.subscribe();
        let _ = tokio::time::timeout(Duration::from_millis(wait), rx.wait_for(|&last| last > since)).await;
    }
    let room = r.room.lock().await;
    let mut out = String::new();
    for e in room.events_since(since) {
        let _ = writeln!(out, "{e}");
    }
    ok(out)
}

#[derive(serde::Deserialize, Default)]
struct SimulateQuery {
    isolation: Option<String>,
    mode: Option<String>,
    seed: Option<String>,
}

/// Body: a window document. Simulates the night for the named isolation's
/// ops (or for the window's fixed phase totals when none is named) and
/// answers with the timeline rows.
async fn simulate(State(svc): State<Service>, headers: HeaderMap, Query(q): Query<SimulateQuery>, body: String) -> ApiResult {
    let r = room(&svc, &headers)?;
    let (window, mut model) = parse_night_setup(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let mode = match q.mode.as_deref() {
        None | Some("expected") => SimMode::Expected,
        Some("sampled") => SimMode::Sampled,
        Some(other) => return Err(ApiError::bad_request(format!("unknown mode `{other}`"))),
    };
    if let Some(s) = &q.seed {
        model.seed = s.parse().map_err(|_| ApiError::bad_request(format!("bad seed `{s}`")))?;
    }
    let room = r.room.lock().await;
    let (isolation, restore) = match &q.isolation {
        None => (Vec::new(), Vec::new()),
        Some(id) => {
            let iso = room
                .isolations()
                .find(|i| i.request.as_str() == id)
                .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_ISOLATION", format!("no isolation `{id}`")))?;
            let ops = |ids: &[OrderId], phase: OrderPhase| -> Vec<SwitchOp> {
                let mut ops: Vec<SwitchOp> = ids
                    .iter()
                    .filter_map(|o| room.order(o.as_str()))
                    .filter(|o| o.phase == phase)
                    .flat_map(|o| o.ops.iter().cloned())
                    .collect();
                ops.sort_by_key(|o| o.seq);
                ops
            };
            (ops(&iso.orders, OrderPhase::Isolation), ops(&iso.restore_orders, OrderPhase::Restore))
        }
    };
    let report = compose_night(&window, phase_inputs_for(room.topology(), &isolation, &restore, &model, mode));
    ok(report.to_csv())
}
