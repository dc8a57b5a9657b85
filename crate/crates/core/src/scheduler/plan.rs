//! Greedy weekly planning, the weekday gates, and Friday disruption replanning.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{calendar_from_records, jobs_from_records, Craft, Crew, Job, JobBook, JobVariant, Owner, ResourceCalendar, VariantLabel};
use crate::ids::*;
use crate::records::{parse_records, DocumentError, Record};
use crate::state::SwitchingState;
use crate::switching::{plan_isolation_with, IsolationRequest, PlanOptions};
use crate::topology::NetworkTopology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PipelineStage {
    LookAhead,
    PrioritiesSet,
    Requested,
    Approved,
    Executing,
}

impl PipelineStage {
    pub const ALL: [PipelineStage; 5] = [
        PipelineStage::LookAhead,
        PipelineStage::PrioritiesSet,
        PipelineStage::Requested,
        PipelineStage::Approved,
        PipelineStage::Executing,
    ];

    pub fn next(self) -> Option<PipelineStage> {
        Self::ALL.get(self as usize + 1).copied()
    }
}

impl fmt::Display for PipelineStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineStage::LookAhead => "look_ahead",
            PipelineStage::PrioritiesSet => "priorities_set",
            PipelineStage::Requested => "requested",
            PipelineStage::Approved => "approved",
            PipelineStage::Executing => "executing",
        })
    }
}

impl FromStr for PipelineStage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|p| p.to_string() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assignment {
    Assigned(VariantLabel),
    Cancelled(String),
}

impl Assignment {
    pub fn variant(&self) -> Option<VariantLabel> {
        match self {
            Assignment::Assigned(l) => Some(*l),
            Assignment::Cancelled(_) => None,
        }
    }

    pub fn is_cancelled(&self) -> bool {
        matches!(self, Assignment::Cancelled(_))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assignment::Assigned(l) => write!(f, "{l}"),
            Assignment::Cancelled(r) => write!(f, "CANCELLED({r})"),
        }
    }
}

/// One (job, night) whose assignment changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffEntry {
    pub night: Night,
    pub job: JobId,
    pub before: Assignment,
    pub after: Assignment,
    pub reason: String,
}

impl fmt::Display for DiffEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} -> {} reason={}", self.night, self.job, self.before, self.after, self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disruption {
    SickCall { craft: Craft, night: Night, count: u32 },
    ContractorCancel { job: JobId },
    WeatherCancel { nights: Vec<Night> },
    ServiceEmergency { night: Night, crafts_lost: Crew, outages_lost: u32 },
}

impl fmt::Display for Disruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disruption::SickCall { craft, night, count } => {
                write!(f, "sick_call craft={} night={night} count={count}", craft.key())
            }
            Disruption::ContractorCancel { job } => write!(f, "contractor_cancel job={job}"),
            Disruption::WeatherCancel { nights } => {
                let n: Vec<&str> = nights.iter().map(|n| n.as_str()).collect();
                write!(f, "weather_cancel nights={}", n.join(","))
            }
            Disruption::ServiceEmergency { night, crafts_lost, outages_lost } => {
                write!(f, "service_emergency night={night}")?;
                for c in Craft::ALL {
                    if crafts_lost[c] > 0 {
                        write!(f, " {}={}", c.key(), crafts_lost[c])?;
                    }
                }
                write!(f, " outages={outages_lost}")
            }
        }
    }
}

impl FromStr for Disruption {
    type Err = DocumentError;

    /// Accepts `key=value` or positional fields:
    /// `sick_call lineman fri 1`, `contractor_cancel J3`, `weather_cancel fri,sat`,
    /// `service_emergency fri lineman=1 outages=1`.
    fn from_str(s: &str) -> Result<Self, DocumentError> {
        let records = parse_records(s)?;
        match records.as_slice() {
            [r] => Disruption::from_record(r),
            _ => Err(DocumentError::new(1, "expected exactly one disruption event")),
        }
    }
}

impl Disruption {
    fn from_record(r: &Record) -> Result<Self, DocumentError> {
        let field = |key: &str, pos: usize| -> Result<String, DocumentError> {
            match r.options.get(key) {
                Some(v) => Ok(v.clone()),
                None => r.arg(pos, key).map(str::to_owned),
            }
        };
        let parse = |key: &str, raw: String| -> Result<u32, DocumentError> {
            raw.parse().map_err(|_| DocumentError::new(r.line, format!("bad {key} `{raw}`")))
        };
        let csv = |raw: String| raw.split(',').filter(|s| !s.is_empty()).map(Night::new).collect::<Vec<_>>();
        Ok(match r.keyword.as_str() {
            "sick_call" => Disruption::SickCall {
                craft: field("craft", 0)?.parse().map_err(|e: String| DocumentError::new(r.line, e))?,
                night: Night::new(field("night", 1)?),
                count: parse("count", field("count", 2)?)?,
            },
            "contractor_cancel" => Disruption::ContractorCancel { job: JobId::new(field("job", 0)?) },
            "weather_cancel" => {
                let mut nights = csv(field("nights", 0)?);
                nights.extend(r.positional.iter().skip(1).flat_map(|p| csv(p.clone())));
                Disruption::WeatherCancel { nights }
            }
            "service_emergency" => {
                let mut crafts_lost = Crew::default();
                for c in Craft::ALL {
                    crafts_lost[c] = r.opt(c.key())?.unwrap_or(0);
                }
                Disruption::ServiceEmergency {
                    night: Night::new(field("night", 0)?),
                    crafts_lost,
                    outages_lost: r.opt("outages")?.unwrap_or(0),
                }
            }
            other => return Err(DocumentError::new(r.line, format!("unknown disruption `{other}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("DUPLICATE_PRIORITY: priority {priority} is used by {first} and {second}")]
    DuplicatePriority { priority: u32, first: JobId, second: JobId },
    #[error("UNKNOWN_NIGHT: `{0}` is not in the calendar")]
    UnknownNight(Night),
    #[error("UNKNOWN_JOB: `{0}`")]
    UnknownJob(JobId),
    #[error("NOT_APPROVED: disruptions apply to approved plans, this plan is at {0}")]
    NotApproved(PipelineStage),
    #[error("GATE_REJECTED: rejections are only accepted at the requested and approved gates, not {0}")]
    RejectionNotAllowed(PipelineStage),
    #[error("PIPELINE_DONE: the plan is already executing")]
    PipelineDone,
    #[error("{0}")]
    Document(#[from] DocumentError),
}

impl ScheduleError {
    pub fn code(&self) -> &'static str {
        match self {
            ScheduleError::DuplicatePriority { .. } => "DUPLICATE_PRIORITY",
            ScheduleError::UnknownNight(_) => "UNKNOWN_NIGHT",
            ScheduleError::UnknownJob(_) => "UNKNOWN_JOB",
            ScheduleError::NotApproved(_) => "NOT_APPROVED",
            ScheduleError::RejectionNotAllowed(_) => "GATE_REJECTED",
            ScheduleError::PipelineDone => "PIPELINE_DONE",
            ScheduleError::Document(_) => "MALFORMED_DOCUMENT",
        }
    }
}

/// What the scheduler needs to decide whether a variant's isolation is workable.
pub struct PlanningContext<'a> {
    pub topology: &'a NetworkTopology,
    pub state: &'a SwitchingState,
    pub requests: &'a [IsolationRequest],
    pub options: PlanOptions,
}

impl<'a> PlanningContext<'a> {
    pub fn new(topology: &'a NetworkTopology, state: &'a SwitchingState, requests: &'a [IsolationRequest]) -> Self {
        Self { topology, state, requests, options: PlanOptions::default() }
    }

    /// `None` if the request admits a plate order and a valid plan, otherwise
    /// the cancellation reason.
    pub fn isolation_blocker(&self, request: &RequestId) -> Option<String> {
        let Some(req) = self.requests.iter().find(|r| &r.id == request) else {
            return Some("unknown_isolation".into());
        };
        match plan_isolation_with(self.topology, self.state, req, &self.options) {
            Ok(_) => None,
            Err(e) => Some(e.code().to_ascii_lowercase()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeeklyPlan {
    pub jobs: JobBook,
    /// The calendar in force, after any disruptions.
    pub calendar: ResourceCalendar,
    pub assignments: BTreeMap<(Night, JobId), Assignment>,
    pub residual: ResourceCalendar,
    pub pipeline_stage: PipelineStage,
    /// Per referenced isolation: `None` when workable, else the reason it is not.
    pub isolation_status: BTreeMap<RequestId, Option<String>>,
    /// Jobs withdrawn for the whole week (contractor cancellations).
    pub withdrawn: BTreeMap<JobId, String>,
    /// Nights on which isolation-bearing variants are barred by weather.
    pub weather_nights: BTreeSet<Night>,
    /// (night, job) pairs rejected at a weekday gate.
    pub rejections: BTreeMap<(Night, JobId), String>,
}

pub fn build_weekly_plan(
    jobs: &JobBook,
    calendar: &ResourceCalendar,
    context: Option<&PlanningContext<'_>>,
) -> Result<WeeklyPlan, ScheduleError> {
    let mut by_priority: BTreeMap<u32, &JobId> = BTreeMap::new();
    for j in &jobs.jobs {
        if let Some(first) = by_priority.insert(j.priority, &j.id) {
            return Err(ScheduleError::DuplicatePriority { priority: j.priority, first: first.clone(), second: j.id.clone() });
        }
        if let Some(n) = j.nights.iter().find(|n| !calendar.has_night(n)) {
            return Err(ScheduleError::UnknownNight(n.clone()));
        }
    }
    let isolation_status = jobs
        .isolations()
        .into_iter()
        .map(|req| {
            let status = match context {
                Some(ctx) => ctx.isolation_blocker(req),
                None => Some("unknown_isolation".to_string()),
            };
            (req.clone(), status)
        })
        .collect();
    let mut plan = WeeklyPlan {
        jobs: jobs.clone(),
        calendar: calendar.clone(),
        assignments: BTreeMap::new(),
        residual: calendar.clone(),
        pipeline_stage: PipelineStage::LookAhead,
        isolation_status,
        withdrawn: BTreeMap::new(),
        weather_nights: BTreeSet::new(),
        rejections: BTreeMap::new(),
    };
    let nights = plan.calendar.nights.clone();
    plan.replan(&nights);
    Ok(plan)
}

/// Remaining resources of one night while it is being filled.
struct NightLedger {
    avail: Crew,
    outages: Option<u32>,
    crews: Option<u32>,
    open_isolations: BTreeSet<RequestId>,
}

impl NightLedger {
    fn new(calendar: &ResourceCalendar, night: &Night) -> Self {
        Self {
            avail: calendar.available(night),
            outages: calendar.track_outages.get(night).copied(),
            crews: calendar.contractor_crews.get(night).copied(),
            open_isolations: BTreeSet::new(),
        }
    }

    /// Craft demand of `v`, with its isolation's overhead unless another job
    /// already carries that isolation tonight.
    fn need(&self, book: &JobBook, v: &JobVariant) -> Crew {
        let mut need = v.demand;
        if let Some(req) = &v.isolation {
            if !self.open_isolations.contains(req) {
                need += book.isolation_overhead.get(req).copied().unwrap_or_default();
            }
        }
        need
    }

    fn check(&self, book: &JobBook, job: &Job, v: &JobVariant) -> Result<(), String> {
        if let Some(c) = self.need(book, v).first_shortfall(&self.avail) {
            return Err(format!("insufficient_{c}"));
        }
        if v.track_outage_needed && self.outages == Some(0) {
            return Err("no_track_outage".into());
        }
        if job.owner == Owner::Contractor && self.crews == Some(0) {
            return Err("no_contractor_crew".into());
        }
        Ok(())
    }

    fn commit(&mut self, book: &JobBook, job: &Job, v: &JobVariant) {
        self.avail = self.avail.saturating_sub(&self.need(book, v));
        if let Some(req) = &v.isolation {
            self.open_isolations.insert(req.clone());
        }
        if v.track_outage_needed {
            if let Some(o) = &mut self.outages {
                *o -= 1;
            }
        }
        if job.owner == Owner::Contractor {
            if let Some(c) = &mut self.crews {
                *c -= 1;
            }
        }
    }
}

impl WeeklyPlan {
    pub fn assignment(&self, night: &str, job: &str) -> Option<&Assignment> {
        self.assignments.get(&(Night::new(night), JobId::new(job)))
    }

    /// Assignments in calendar night order, jobs by priority.
    pub fn ordered_assignments(&self) -> Vec<(&Night, &Job, &Assignment)> {
        let mut out = Vec::new();
        for n in &self.calendar.nights {
            for j in self.jobs.by_priority() {
                if let Some(a) = self.assignments.get(&(n.clone(), j.id.clone())) {
                    out.push((n, j, a));
                }
            }
        }
        out
    }

    /// Reason a variant can never run on `night` regardless of resources.
    fn static_blocker(&self, night: &Night, job: &Job, v: &JobVariant) -> Option<String> {
        if let Some(r) = self.withdrawn.get(&job.id) {
            return Some(r.clone());
        }
        if let Some(r) = self.rejections.get(&(night.clone(), job.id.clone())) {
            return Some(r.clone());
        }
        let req = v.isolation.as_ref()?;
        if self.weather_nights.contains(night) {
            return Some("weather".into());
        }
        self.isolation_status.get(req).cloned().unwrap_or_else(|| Some("unknown_isolation".into()))
    }

    fn try_variant(&self, ledger: &NightLedger, night: &Night, job: &Job, v: &JobVariant) -> Result<(), String> {
        match self.static_blocker(night, job, v) {
            Some(r) => Err(r),
            None => ledger.check(&self.jobs, job, v),
        }
    }

    /// Tries A, B, C in order; the first fit, or the first variant's failure.
    fn fallback(&self, ledger: &NightLedger, night: &Night, job: &Job) -> Result<VariantLabel, String> {
        let mut first_reason = None;
        for v in &job.variants {
            match self.try_variant(ledger, night, job, v) {
                Ok(()) => return Ok(v.label),
                Err(r) => {
                    first_reason.get_or_insert(r);
                }
            }
        }
        Err(first_reason.unwrap_or_else(|| "no_variant".into()))
    }

    fn variant<'j>(job: &'j Job, label: VariantLabel) -> &'j JobVariant {
        job.variants.iter().find(|v| v.label == label).expect("assigned label exists")
    }

    /// Re-fills one night with stability. Jobs assigned before are visited
    /// first in priority order and keep their variant if it still fits
    /// (otherwise they fall back A→B→C); then previously cancelled jobs, in
    /// priority order, take whatever fits in what is left. On a fresh night
    /// this is plain priority-greedy. Returns the change reasons of jobs whose
    /// kept variant no longer fit.
    fn fill_night(&mut self, night: &Night) -> BTreeMap<JobId, String> {
        let mut ledger = NightLedger::new(&self.calendar, night);
        let jobs: Vec<Job> = self.jobs.by_priority().into_iter().filter(|j| j.nights.contains(night)).cloned().collect();
        let prev: BTreeMap<JobId, VariantLabel> = jobs
            .iter()
            .filter_map(|j| {
                let a = self.assignments.get(&(night.clone(), j.id.clone()))?;
                Some((j.id.clone(), a.variant()?))
            })
            .collect();
        let mut reasons = BTreeMap::new();
        let mut result: BTreeMap<JobId, Assignment> = BTreeMap::new();
        let previously_assigned = jobs.iter().filter(|j| prev.contains_key(&j.id));
        let previously_cancelled = jobs.iter().filter(|j| !prev.contains_key(&j.id));
        for job in previously_assigned.chain(previously_cancelled) {
            let kept = prev.get(&job.id).and_then(|&label| {
                match self.try_variant(&ledger, night, job, Self::variant(job, label)) {
                    Ok(()) => Some(label),
                    Err(r) => {
                        reasons.insert(job.id.clone(), r);
                        None
                    }
                }
            });
            let chosen = match kept {
                Some(l) => Ok(l),
                None => self.fallback(&ledger, night, job),
            };
            let a = match chosen {
                Ok(l) => {
                    ledger.commit(&self.jobs, job, Self::variant(job, l));
                    Assignment::Assigned(l)
                }
                Err(r) => Assignment::Cancelled(r),
            };
            result.insert(job.id.clone(), a);
        }
        for (job, a) in result {
            self.assignments.insert((night.clone(), job), a);
        }
        reasons
    }

    /// Re-fills `nights` and returns the diff against the previous assignments.
    fn replan(&mut self, nights: &[Night]) -> Vec<DiffEntry> {
        let before = self.assignments.clone();
        let mut diff = Vec::new();
        for night in self.calendar.nights.clone() {
            if !nights.contains(&night) {
                continue;
            }
            let reasons = self.fill_night(&night);
            for job in self.jobs.by_priority() {
                let key = (night.clone(), job.id.clone());
                let (Some(old), Some(new)) = (before.get(&key), self.assignments.get(&key)) else { continue };
                if old == new || (old.is_cancelled() && new.is_cancelled()) {
                    continue;
                }
                let reason = match new {
                    Assignment::Cancelled(r) => r.clone(),
                    Assignment::Assigned(_) if old.is_cancelled() => "revived".into(),
                    Assignment::Assigned(_) => reasons.get(&job.id).cloned().unwrap_or_default(),
                };
                diff.push(DiffEntry { night: night.clone(), job: job.id.clone(), before: old.clone(), after: new.clone(), reason });
            }
        }
        self.residual = self.compute_residual();
        diff
    }

    /// Calendar minus every committed demand.
    pub fn compute_residual(&self) -> ResourceCalendar {
        let mut residual = self.calendar.clone();
        for (night, usage) in self.usage() {
            let crew = residual.availability.entry(night.clone()).or_default();
            *crew = crew.saturating_sub(&usage.crafts);
            if let Some(o) = residual.track_outages.get_mut(&night) {
                *o = o.saturating_sub(usage.outages);
            }
            if let Some(c) = residual.contractor_crews.get_mut(&night) {
                *c = c.saturating_sub(usage.contractor_jobs);
            }
        }
        residual
    }

    fn usage(&self) -> BTreeMap<Night, Usage> {
        let mut out: BTreeMap<Night, Usage> = BTreeMap::new();
        let mut isolations: BTreeSet<(Night, RequestId)> = BTreeSet::new();
        for ((night, job), a) in &self.assignments {
            let Some(label) = a.variant() else { continue };
            let Some(job) = self.jobs.job(job.as_str()) else { continue };
            let v = Self::variant(job, label);
            let u = out.entry(night.clone()).or_default();
            u.crafts += v.demand;
            if let Some(req) = &v.isolation {
                if isolations.insert((night.clone(), req.clone())) {
                    u.crafts += self.jobs.isolation_overhead.get(req).copied().unwrap_or_default();
                }
            }
            u.outages += v.track_outage_needed as u32;
            u.contractor_jobs += (job.owner == Owner::Contractor) as u32;
        }
        out
    }

    /// Every night/craft over-commitment, as `night craft used>available`.
    pub fn feasibility_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (night, u) in self.usage() {
            let avail = self.calendar.available(&night);
            for c in Craft::ALL {
                if u.crafts[c] > avail[c] {
                    out.push(format!("{night} {c} {}>{}", u.crafts[c], avail[c]));
                }
            }
            if let Some(&o) = self.calendar.track_outages.get(&night) {
                if u.outages > o {
                    out.push(format!("{night} outages {}>{o}", u.outages));
                }
            }
            if let Some(&k) = self.calendar.contractor_crews.get(&night) {
                if u.contractor_jobs > k {
                    out.push(format!("{night} contractor_crews {}>{k}", u.contractor_jobs));
                }
            }
        }
        out
    }

    /// Applies the next weekday gate. Rejections (a railroad refusing an
    /// outage on Wednesday, or approval withheld on Thursday) are accepted only
    /// when advancing to `requested` or `approved`; each rejected (job, night)
    /// is cancelled and its night re-filled with stability.
    pub fn advance(&mut self, rejections: &[(JobId, Night)]) -> Result<Vec<DiffEntry>, ScheduleError> {
        let next = self.pipeline_stage.next().ok_or(ScheduleError::PipelineDone)?;
        if !rejections.is_empty() && !matches!(next, PipelineStage::Requested | PipelineStage::Approved) {
            return Err(ScheduleError::RejectionNotAllowed(next));
        }
        let mut nights = Vec::new();
        for (job, night) in rejections {
            let j = self.jobs.job(job.as_str()).ok_or_else(|| ScheduleError::UnknownJob(job.clone()))?;
            if !self.calendar.has_night(night) || !j.nights.contains(night) {
                return Err(ScheduleError::UnknownNight(night.clone()));
            }
            self.rejections.insert((night.clone(), job.clone()), format!("rejected_at_{next}"));
            nights.push(night.clone());
        }
        self.pipeline_stage = next;
        Ok(self.replan(&nights))
    }

    /// Advances through every remaining gate up to and including `stage`.
    pub fn advance_to(&mut self, stage: PipelineStage) -> Result<(), ScheduleError> {
        while self.pipeline_stage < stage {
            self.advance(&[])?;
        }
        Ok(())
    }

    pub fn to_document(&self) -> String {
        let mut out = format!("stage {}\n", self.pipeline_stage);
        out.push_str(&self.jobs.to_document());
        out.push_str(&self.calendar.to_document());
        for (req, status) in &self.isolation_status {
            let _ = writeln!(out, "isostatus {req} {}", status.as_deref().unwrap_or("ok"));
        }
        for (job, reason) in &self.withdrawn {
            let _ = writeln!(out, "withdrawn {job} reason={reason}");
        }
        for n in &self.weather_nights {
            let _ = writeln!(out, "weather {n}");
        }
        for ((n, job), reason) in &self.rejections {
            let _ = writeln!(out, "rejected {n} {job} reason={reason}");
        }
        for (n, job, a) in self.ordered_assignments() {
            match a {
                Assignment::Assigned(l) => {
                    let _ = writeln!(out, "assign {n} {} {l}", job.id);
                }
                Assignment::Cancelled(r) => {
                    let _ = writeln!(out, "assign {n} {} cancelled reason={r}", job.id);
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<WeeklyPlan, ScheduleError> {
        let records = parse_records(text)?;
        let (mut job_recs, mut cal_recs, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in records {
            match r.keyword.as_str() {
                "job" | "variant" | "isolation" => job_recs.push(r),
                "avail" | "crews" | "outages" => cal_recs.push(r),
                _ => rest.push(r),
            }
        }
        let jobs = jobs_from_records(&job_recs)?;
        let calendar = calendar_from_records(&cal_recs)?;
        let mut plan = WeeklyPlan {
            jobs,
            residual: calendar.clone(),
            calendar,
            assignments: BTreeMap::new(),
            pipeline_stage: PipelineStage::LookAhead,
            isolation_status: BTreeMap::new(),
            withdrawn: BTreeMap::new(),
            weather_nights: BTreeSet::new(),
            rejections: BTreeMap::new(),
        };
        let reason = |r: &Record| -> Result<String, DocumentError> {
            r.opt::<String>("reason")?.ok_or_else(|| DocumentError::new(r.line, "missing reason="))
        };
        for r in &rest {
            match r.keyword.as_str() {
                "stage" => {
                    plan.pipeline_stage = r.parse_arg(0, "stage")?;
                }
                "isostatus" => {
                    let status = r.arg(1, "status")?;
                    plan.isolation_status.insert(
                        RequestId::new(r.arg(0, "request")?),
                        (status != "ok").then(|| status.to_string()),
                    );
                }
                "withdrawn" => {
                    plan.withdrawn.insert(JobId::new(r.arg(0, "job")?), reason(r)?);
                }
                "weather" => {
                    plan.weather_nights.insert(Night::new(r.arg(0, "night")?));
                }
                "rejected" => {
                    plan.rejections
                        .insert((Night::new(r.arg(0, "night")?), JobId::new(r.arg(1, "job")?)), reason(r)?);
                }
                "assign" => {
                    r.expect_arity(3, 3)?;
                    let key = (Night::new(r.arg(0, "night")?), JobId::new(r.arg(1, "job")?));
                    let job = plan.jobs.job(key.1.as_str()).ok_or_else(|| ScheduleError::UnknownJob(key.1.clone()))?;
                    let a = match r.arg(2, "variant")? {
                        "cancelled" => Assignment::Cancelled(reason(r)?),
                        v => {
                            let l: VariantLabel = r.parse_arg(2, "variant")?;
                            if !job.variants.iter().any(|x| x.label == l) {
                                return Err(DocumentError::new(r.line, format!("job {} has no variant {v}", job.id)).into());
                            }
                            Assignment::Assigned(l)
                        }
                    };
                    plan.assignments.insert(key, a);
                }
                other => return Err(DocumentError::new(r.line, format!("unknown plan record `{other}`")).into()),
            }
        }
        plan.residual = plan.compute_residual();
        Ok(plan)
    }
}

#[derive(Default)]
struct Usage {
    crafts: Crew,
    outages: u32,
    contractor_jobs: u32,
}

/// Adjusts availability for `event`, re-fills only the affected nights with
/// stability, and returns the new plan with every changed (job, night).
pub fn apply_disruption(plan: &WeeklyPlan, event: &Disruption) -> Result<(WeeklyPlan, Vec<DiffEntry>), ScheduleError> {
    if plan.pipeline_stage < PipelineStage::Approved {
        return Err(ScheduleError::NotApproved(plan.pipeline_stage));
    }
    let mut next = plan.clone();
    let known_night = |n: &Night| {
        if plan.calendar.has_night(n) {
            Ok(())
        } else {
            Err(ScheduleError::UnknownNight(n.clone()))
        }
    };
    let nights: Vec<Night> = match event {
        Disruption::SickCall { craft, night, count } => {
            known_night(night)?;
            let crew = next.calendar.availability.entry(night.clone()).or_default();
            crew[*craft] = crew[*craft].saturating_sub(*count);
            vec![night.clone()]
        }
        Disruption::ContractorCancel { job } => {
            let j = plan.jobs.job(job.as_str()).ok_or_else(|| ScheduleError::UnknownJob(job.clone()))?;
            next.withdrawn.insert(job.clone(), "contractor_cancelled".into());
            j.nights.clone()
        }
        Disruption::WeatherCancel { nights } => {
            for n in nights {
                known_night(n)?;
                next.weather_nights.insert(n.clone());
            }
            nights.clone()
        }
        Disruption::ServiceEmergency { night, crafts_lost, outages_lost } => {
            known_night(night)?;
            let crew = next.calendar.availability.entry(night.clone()).or_default();
            *crew = crew.saturating_sub(crafts_lost);
            if let Some(o) = next.calendar.track_outages.get_mut(night) {
                *o = o.saturating_sub(*outages_lost);
            }
            vec![night.clone()]
        }
    };
    let diff = next.replan(&nights);
    Ok((next, diff))
}
