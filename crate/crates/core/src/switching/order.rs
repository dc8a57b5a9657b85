//! Operating orders: the per-line-group checklist forms a Power Director
//! works through, with their execution records.
//!
//! Document format (one or more orders per file):
//!
//! ```text
//! order <id>
//! director <person>
//! line_group <group>
//! date <text>
//! phase isolation|restore
//! request <request id>            # optional
//! plate_order <plate id>          # optional
//! shared_with <person>            # optional (double-header)
//! shared <device> [<device> ...]  # optional
//! <seq> <kind> <target> <actor> [step=<n>] [who=<p> at=<s> dur=<s> result=<r>]
//! ```
//!
//! The export appends the form's four sections ("SCADA Operations & Tags",
//! "Switching Orders", "Grounds", "Plate Orders") as comment blocks; they
//! are derived from the rows and ignored when parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{execute_op, Actor, InterlockError, OpContext, OpKind, OpOutcome, SwitchOp};
use crate::ids::*;
use crate::records::{parse_records, DocumentError};
use crate::state::SwitchingState;
use crate::topology::NetworkTopology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrderPhase {
    Isolation,
    Restore,
}

impl fmt::Display for OrderPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderPhase::Isolation => "isolation",
            OrderPhase::Restore => "restore",
        })
    }
}

impl FromStr for OrderPhase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "isolation" => Ok(OrderPhase::Isolation),
            "restore" => Ok(OrderPhase::Restore),
            other => Err(format!("unknown order phase `{other}`")),
        }
    }
}

/// Execution record of one op.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpRecord {
    pub seq: u32,
    pub who: PersonId,
    /// Simulation seconds at completion.
    pub at: u64,
    pub duration_s: u64,
    /// `ok`, or `dead`/`live` for a test for potential.
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error("order {0} is already complete")]
    Complete(OrderId),
    #[error("{who} may not operate order {order}")]
    NotAuthorized { order: OrderId, who: PersonId },
    #[error("op {seq} on shared equipment {target} awaits confirmation from {}", missing.iter().map(|p| p.as_str()).collect::<Vec<_>>().join(","))]
    AwaitingConfirmation { seq: u32, target: String, missing: Vec<PersonId> },
    #[error("{0}")]
    Interlock(#[from] InterlockError),
}

impl StepError {
    pub fn code(&self) -> &'static str {
        match self {
            StepError::Complete(_) => "ORDER_COMPLETE",
            StepError::NotAuthorized { .. } => "NOT_AUTHORIZED",
            StepError::AwaitingConfirmation { .. } => "AWAITING_CONFIRMATION",
            StepError::Interlock(e) => e.kind.code(),
        }
    }

    pub fn participants(&self) -> Vec<String> {
        match self {
            StepError::Complete(o) => vec![o.to_string()],
            StepError::NotAuthorized { order, who } => vec![order.to_string(), who.to_string()],
            StepError::AwaitingConfirmation { target, missing, .. } => {
                std::iter::once(target.clone()).chain(missing.iter().map(|p| p.to_string())).collect()
            }
            StepError::Interlock(e) => e.participants.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatingOrder {
    pub id: OrderId,
    pub line_group: LineGroup,
    pub phase: OrderPhase,
    pub date: String,
    pub request: Option<RequestId>,
    pub plate_order: Option<PlateOrderId>,
    pub ops: Vec<SwitchOp>,
    /// Record k exists only once records 0..k are complete and successful.
    pub records: Vec<OpRecord>,
    pub director: PersonId,
    pub shared_with: Option<PersonId>,
    /// Devices that need both directors' confirmation (double-header).
    pub shared_targets: BTreeSet<String>,
    /// Confirmations collected for shared ops, by seq.
    pub confirmations: BTreeMap<u32, BTreeSet<PersonId>>,
    /// Nodes proven dead by this order's completed tests.
    pub tested_dead: BTreeSet<NodeId>,
}

impl OperatingOrder {
    pub fn new(id: impl Into<OrderId>, line_group: impl Into<LineGroup>, director: impl Into<PersonId>) -> Self {
        Self {
            id: id.into(),
            line_group: line_group.into(),
            phase: OrderPhase::Isolation,
            date: "unscheduled".into(),
            request: None,
            plate_order: None,
            ops: Vec::new(),
            records: Vec::new(),
            director: director.into(),
            shared_with: None,
            shared_targets: BTreeSet::new(),
            confirmations: BTreeMap::new(),
            tested_dead: BTreeSet::new(),
        }
    }

    pub fn next_op(&self) -> Option<&SwitchOp> {
        self.ops.get(self.records.len())
    }

    pub fn is_complete(&self) -> bool {
        self.records.len() == self.ops.len()
    }

    pub fn device_targets(&self) -> BTreeSet<&str> {
        self.ops.iter().filter(|o| !o.kind.targets_ground()).map(|o| o.target.as_str()).collect()
    }

    /// Directors whose confirmation the next op still lacks.
    pub fn missing_confirmations(&self) -> Vec<PersonId> {
        let (Some(op), Some(second)) = (self.next_op(), &self.shared_with) else { return Vec::new() };
        if !self.shared_targets.contains(&op.target) {
            return Vec::new();
        }
        let have = self.confirmations.get(&op.seq);
        [&self.director, second]
            .into_iter()
            .filter(|p| have.is_none_or(|h| !h.contains(*p)))
            .cloned()
            .collect()
    }

    /// Record a director's confirmation of the next op.
    pub fn confirm(&mut self, who: &PersonId) -> Result<(), StepError> {
        let Some(op) = self.next_op() else { return Err(StepError::Complete(self.id.clone())) };
        if *who != self.director && self.shared_with.as_ref() != Some(who) {
            return Err(StepError::NotAuthorized { order: self.id.clone(), who: who.clone() });
        }
        let seq = op.seq;
        self.confirmations.entry(seq).or_default().insert(who.clone());
        Ok(())
    }

    pub fn context(&self, now: u64) -> OpContext {
        OpContext { director: self.director.clone(), tested_dead: self.tested_dead.clone(), require_test: true, now }
    }

    /// Validate and execute the next op as `who`, appending its record.
    pub fn step(
        &mut self,
        topology: &NetworkTopology,
        state: &SwitchingState,
        who: &PersonId,
        now: u64,
        duration_s: u64,
    ) -> Result<SwitchingState, StepError> {
        let Some(op) = self.next_op().cloned() else { return Err(StepError::Complete(self.id.clone())) };
        if *who != self.director && self.shared_with.as_ref() != Some(who) {
            return Err(StepError::NotAuthorized { order: self.id.clone(), who: who.clone() });
        }
        let missing = self.missing_confirmations();
        if !missing.is_empty() {
            return Err(StepError::AwaitingConfirmation { seq: op.seq, target: op.target.clone(), missing });
        }
        let (next, outcome) = execute_op(topology, state, &op, &self.context(now))?;
        self.record(&op, who, now, duration_s, &outcome);
        Ok(next)
    }

    /// Append the record for the next op (used by `step` and by replays that
    /// bypass the interlocks).
    pub fn record(&mut self, op: &SwitchOp, who: &PersonId, now: u64, duration_s: u64, outcome: &OpOutcome) {
        if let OpOutcome::TestedDead(nodes) = outcome {
            self.tested_dead.extend(nodes.iter().cloned());
        }
        self.records.push(OpRecord {
            seq: op.seq,
            who: who.clone(),
            at: now,
            duration_s,
            result: outcome.label().to_owned(),
        });
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "order {}", self.id);
        let _ = writeln!(out, "director {}", self.director);
        let _ = writeln!(out, "line_group {}", self.line_group);
        let _ = writeln!(out, "date {}", crate::records::quote(&self.date));
        let _ = writeln!(out, "phase {}", self.phase);
        if let Some(r) = &self.request {
            let _ = writeln!(out, "request {r}");
        }
        if let Some(p) = &self.plate_order {
            let _ = writeln!(out, "plate_order {p}");
        }
        if let Some(s) = &self.shared_with {
            let _ = writeln!(out, "shared_with {s}");
        }
        if !self.shared_targets.is_empty() {
            let _ = writeln!(out, "shared {}", self.shared_targets.iter().cloned().collect::<Vec<_>>().join(" "));
        }
        for (i, op) in self.ops.iter().enumerate() {
            let _ = write!(out, "{} {} {} {} step={}", op.seq, op.kind, op.target, op.actor, op.step);
            if let Some(r) = self.records.get(i) {
                let _ = write!(out, " who={} at={} dur={} result={}", r.who, r.at, r.duration_s, r.result);
            }
            out.push('\n');
        }
        let rows = |pred: &dyn Fn(&SwitchOp) -> bool| -> Vec<String> {
            self.ops.iter().filter(|o| pred(o)).map(|o| format!("#   {} {} {}", o.seq, o.kind, o.target)).collect()
        };
        let sections: [(&str, Vec<String>); 4] = [
            (
                "SCADA Operations & Tags",
                rows(&|o| o.actor == Actor::RemoteScada || matches!(o.kind, OpKind::Tag | OpKind::Untag)),
            ),
            (
                "Switching Orders",
                rows(&|o| o.actor == Actor::FieldLineman && !o.kind.targets_ground() && !matches!(o.kind, OpKind::Tag | OpKind::Untag)),
            ),
            ("Grounds", rows(&|o| o.kind.targets_ground())),
            (
                "Plate Orders",
                self.plate_order.iter().map(|p| format!("#   {p}")).collect(),
            ),
        ];
        for (title, lines) in sections {
            let _ = writeln!(out, "# == {title} ==");
            if lines.is_empty() {
                let _ = writeln!(out, "#   (none)");
            }
            for l in lines {
                let _ = writeln!(out, "{l}");
            }
        }
        out
    }
}

/// Parse one or more order documents.
pub fn parse_orders(text: &str) -> Result<Vec<OperatingOrder>, DocumentError> {
    let mut out: Vec<OperatingOrder> = Vec::new();
    for r in parse_records(text)? {
        if r.keyword == "order" {
            r.expect_arity(1, 1)?;
            out.push(OperatingOrder::new(r.arg(0, "order id")?, "", ""));
            continue;
        }
        let cur = out
            .last_mut()
            .ok_or_else(|| DocumentError::new(r.line, format!("`{}` before any `order`", r.keyword)))?;
        match r.keyword.as_str() {
            "director" => cur.director = PersonId::new(r.arg(0, "director")?),
            "line_group" => cur.line_group = LineGroup::new(r.arg(0, "line group")?),
            "date" => cur.date = r.arg(0, "date")?.to_owned(),
            "phase" => cur.phase = r.parse_arg(0, "phase")?,
            "request" => cur.request = Some(RequestId::new(r.arg(0, "request")?)),
            "plate_order" => cur.plate_order = Some(PlateOrderId::new(r.arg(0, "plate order")?)),
            "shared_with" => cur.shared_with = Some(PersonId::new(r.arg(0, "director")?)),
            "shared" => cur.shared_targets.extend(r.positional.iter().cloned()),
            seq if seq.chars().all(|c| c.is_ascii_digit()) => {
                r.expect_arity(3, 3)?;
                let seq: u32 = seq.parse().map_err(|_| DocumentError::new(r.line, "bad sequence number"))?;
                let op = SwitchOp {
                    seq,
                    kind: r.parse_arg(0, "op kind")?,
                    target: r.arg(1, "target")?.to_owned(),
                    actor: r.parse_arg(2, "actor")?,
                    order_ref: cur.id.clone(),
                    step: r.opt("step")?.unwrap_or(0),
                };
                if let Some(who) = r.opt::<String>("who")? {
                    if cur.records.len() != cur.ops.len() {
                        return Err(DocumentError::new(r.line, "record follows an unrecorded op"));
                    }
                    cur.records.push(OpRecord {
                        seq,
                        who: PersonId::new(who),
                        at: r.opt("at")?.unwrap_or(0),
                        duration_s: r.opt("dur")?.unwrap_or(0),
                        result: r.opt("result")?.unwrap_or_else(|| "ok".to_owned()),
                    });
                }
                cur.ops.push(op);
            }
            other => return Err(DocumentError::new(r.line, format!("unknown order record `{other}`"))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SharedControlError {
    #[error("director `{0}` is unknown")]
    UnknownDirector(PersonId),
    #[error("order {0} is not active")]
    Inactive(OrderId),
    #[error("{0} already directs this order")]
    SameDirector(PersonId),
}

/// Put `order` under double-header control with `second_director`: every
/// device it shares with one of that director's orders needs both
/// directors' confirmation before it is operated.
pub fn request_shared_control(
    order: &OperatingOrder,
    second_director: &PersonId,
    all_orders: &[OperatingOrder],
    known_directors: &BTreeSet<PersonId>,
) -> Result<OperatingOrder, SharedControlError> {
    if !known_directors.contains(second_director) {
        return Err(SharedControlError::UnknownDirector(second_director.clone()));
    }
    if *second_director == order.director {
        return Err(SharedControlError::SameDirector(second_director.clone()));
    }
    if order.is_complete() {
        return Err(SharedControlError::Inactive(order.id.clone()));
    }
    let mine = order.device_targets();
    let theirs: BTreeSet<&str> = all_orders
        .iter()
        .filter(|o| o.director == *second_director && o.id != order.id)
        .flat_map(|o| o.device_targets())
        .collect();
    let mut updated = order.clone();
    updated.shared_with = Some(second_director.clone());
    updated.shared_targets = mine.intersection(&theirs).map(|s| s.to_string()).collect();
    Ok(updated)
}
