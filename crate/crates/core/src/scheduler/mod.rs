//! Weekly maintenance planning under five-craft resource limits.
//!
//! Jobs file:
//!
//! ```text
//! job <id> prio=<n> owner=contractor|in_house nights=<csv>
//! variant <A|B|C> lineman=<n> groundman=<n> director=<n> flagman=<n> dispatcher=<n> [isolation=<req>] [outage=0|1] progress=<units>
//! isolation <req> lineman=<n> ...   # craft overhead of an isolation, counted once per night however many jobs share it
//! ```
//!
//! Calendar file:
//!
//! ```text
//! avail <night> <craft> <n>
//! crews <night> <n>        # contractor crews
//! outages <night> <n>      # track outages the railroad can grant (unlimited if absent)
//! ```

mod capacity;
mod plan;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::ops::{Add, AddAssign, Index, IndexMut};
use std::str::FromStr;

use crate::ids::*;
use crate::records::{parse_records, DocumentError, Record};

pub use capacity::{binding_crafts, effective_capacity, CapacityReport};
pub use plan::{
    apply_disruption, build_weekly_plan, Assignment, DiffEntry, Disruption, PipelineStage, PlanningContext,
    ScheduleError, WeeklyPlan,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Craft {
    Lineman,
    Groundman,
    PowerDirector,
    Flagman,
    Dispatcher,
}

impl Craft {
    pub const ALL: [Craft; 5] = [Craft::Lineman, Craft::Groundman, Craft::PowerDirector, Craft::Flagman, Craft::Dispatcher];

    /// Key used in job and calendar files.
    pub fn key(self) -> &'static str {
        match self {
            Craft::Lineman => "lineman",
            Craft::Groundman => "groundman",
            Craft::PowerDirector => "director",
            Craft::Flagman => "flagman",
            Craft::Dispatcher => "dispatcher",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Craft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Craft::PowerDirector => "power_director",
            other => other.key(),
        })
    }
}

impl FromStr for Craft {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "lineman" | "linemen" => Craft::Lineman,
            "groundman" | "groundmen" => Craft::Groundman,
            "director" | "power_director" => Craft::PowerDirector,
            "flagman" | "flagmen" => Craft::Flagman,
            "dispatcher" => Craft::Dispatcher,
            other => return Err(format!("unknown craft `{other}`")),
        })
    }
}

/// Headcount per craft.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Crew(pub [u32; 5]);

impl Crew {
    pub fn new(lineman: u32, groundman: u32, director: u32, flagman: u32, dispatcher: u32) -> Self {
        Crew([lineman, groundman, director, flagman, dispatcher])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&n| n == 0)
    }

    /// First craft (in [`Craft::ALL`] order) where `self` exceeds `available`.
    pub fn first_shortfall(&self, available: &Crew) -> Option<Craft> {
        Craft::ALL.into_iter().find(|c| self[*c] > available[*c])
    }

    pub fn saturating_sub(&self, other: &Crew) -> Crew {
        let mut out = *self;
        for c in Craft::ALL {
            out[c] = out[c].saturating_sub(other[c]);
        }
        out
    }

    fn from_record(r: &Record) -> Result<Crew, DocumentError> {
        let mut crew = Crew::default();
        for c in Craft::ALL {
            crew[c] = r.opt(c.key())?.unwrap_or(0);
        }
        Ok(crew)
    }

    fn write_options(&self, out: &mut String) {
        for c in Craft::ALL {
            let _ = write!(out, " {}={}", c.key(), self[c]);
        }
    }
}

impl Index<Craft> for Crew {
    type Output = u32;
    fn index(&self, c: Craft) -> &u32 {
        &self.0[c.index()]
    }
}

impl IndexMut<Craft> for Crew {
    fn index_mut(&mut self, c: Craft) -> &mut u32 {
        &mut self.0[c.index()]
    }
}

impl Add for Crew {
    type Output = Crew;
    fn add(mut self, rhs: Crew) -> Crew {
        self += rhs;
        self
    }
}

impl AddAssign for Crew {
    fn add_assign(&mut self, rhs: Crew) {
        for c in Craft::ALL {
            self[c] += rhs[c];
        }
    }
}

impl fmt::Display for Crew {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "{}", parts.join("/"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResourceCalendar {
    /// Nights in declaration order.
    pub nights: Vec<Night>,
    pub availability: BTreeMap<Night, Crew>,
    pub contractor_crews: BTreeMap<Night, u32>,
    /// Track outages grantable per night; a night without an entry is unlimited.
    pub track_outages: BTreeMap<Night, u32>,
}

impl ResourceCalendar {
    pub fn add_night(&mut self, night: impl Into<Night>, availability: Crew) -> &mut Self {
        let night = night.into();
        if !self.nights.contains(&night) {
            self.nights.push(night.clone());
        }
        self.availability.insert(night, availability);
        self
    }

    pub fn available(&self, night: &Night) -> Crew {
        self.availability.get(night).copied().unwrap_or_default()
    }

    pub fn has_night(&self, night: &Night) -> bool {
        self.nights.contains(night)
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for n in &self.nights {
            let crew = self.available(n);
            for c in Craft::ALL {
                let _ = writeln!(out, "avail {n} {} {}", c.key(), crew[c]);
            }
            if let Some(k) = self.contractor_crews.get(n) {
                let _ = writeln!(out, "crews {n} {k}");
            }
            if let Some(k) = self.track_outages.get(n) {
                let _ = writeln!(out, "outages {n} {k}");
            }
        }
        out
    }
}

pub fn parse_calendar(text: &str) -> Result<ResourceCalendar, DocumentError> {
    calendar_from_records(&parse_records(text)?)
}

fn calendar_from_records(records: &[Record]) -> Result<ResourceCalendar, DocumentError> {
    let mut cal = ResourceCalendar::default();
    for r in records {
        let night = Night::new(r.arg(0, "night")?);
        if !cal.nights.contains(&night) {
            cal.nights.push(night.clone());
        }
        match r.keyword.as_str() {
            "avail" => {
                r.expect_arity(3, 3)?;
                let craft: Craft = r.parse_arg(1, "craft")?;
                let n: u32 = r.parse_arg(2, "headcount")?;
                cal.availability.entry(night).or_default()[craft] = n;
            }
            "crews" => {
                r.expect_arity(2, 2)?;
                cal.contractor_crews.insert(night, r.parse_arg(1, "crew count")?);
            }
            "outages" => {
                r.expect_arity(2, 2)?;
                cal.track_outages.insert(night, r.parse_arg(1, "outage count")?);
            }
            other => return Err(DocumentError::new(r.line, format!("unknown calendar record `{other}`"))),
        }
    }
    Ok(cal)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VariantLabel {
    A,
    B,
    C,
}

impl fmt::Display for VariantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for VariantLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "A" => VariantLabel::A,
            "B" => VariantLabel::B,
            "C" => VariantLabel::C,
            other => return Err(format!("unknown variant `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobVariant {
    pub label: VariantLabel,
    pub demand: Crew,
    pub isolation: Option<RequestId>,
    pub track_outage_needed: bool,
    pub expected_progress: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Contractor,
    InHouse,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Contractor => "contractor",
            Owner::InHouse => "in_house",
        })
    }
}

impl FromStr for Owner {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "contractor" => Owner::Contractor,
            "in_house" | "inhouse" => Owner::InHouse,
            other => return Err(format!("unknown owner `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub id: JobId,
    /// Lower is more important; unique within a week.
    pub priority: u32,
    pub nights: Vec<Night>,
    /// A first.
    pub variants: Vec<JobVariant>,
    pub owner: Owner,
}

/// Jobs plus the craft overhead of each isolation they may share.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JobBook {
    pub jobs: Vec<Job>,
    pub isolation_overhead: BTreeMap<RequestId, Crew>,
}

impl JobBook {
    pub fn job(&self, id: &str) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id.as_str() == id)
    }

    /// Jobs in priority order.
    pub fn by_priority(&self) -> Vec<&Job> {
        let mut jobs: Vec<&Job> = self.jobs.iter().collect();
        jobs.sort_by_key(|j| (j.priority, j.id.clone()));
        jobs
    }

    pub fn isolations(&self) -> BTreeSet<&RequestId> {
        self.jobs.iter().flat_map(|j| j.variants.iter().filter_map(|v| v.isolation.as_ref())).collect()
    }

    pub fn to_document(&self) -> String {
        let mut out = String::new();
        for j in &self.jobs {
            let nights: Vec<&str> = j.nights.iter().map(|n| n.as_str()).collect();
            let _ = writeln!(out, "job {} prio={} owner={} nights={}", j.id, j.priority, j.owner, nights.join(","));
            for v in &j.variants {
                let _ = write!(out, "variant {}", v.label);
                v.demand.write_options(&mut out);
                if let Some(i) = &v.isolation {
                    let _ = write!(out, " isolation={i}");
                }
                if v.track_outage_needed {
                    out.push_str(" outage=1");
                }
                let _ = writeln!(out, " progress={}", v.expected_progress);
            }
        }
        for (req, crew) in &self.isolation_overhead {
            let _ = write!(out, "isolation {req}");
            crew.write_options(&mut out);
            out.push('\n');
        }
        out
    }
}

pub fn parse_jobs(text: &str) -> Result<JobBook, DocumentError> {
    jobs_from_records(&parse_records(text)?)
}

fn jobs_from_records(records: &[Record]) -> Result<JobBook, DocumentError> {
    let mut book = JobBook::default();
    let crafts: Vec<&str> = Craft::ALL.iter().map(|c| c.key()).collect();
    for r in records {
        match r.keyword.as_str() {
            "job" => {
                r.expect_arity(1, 1)?;
                r.reject_unknown_options(&["prio", "owner", "nights"])?;
                let id = JobId::new(r.arg(0, "job id")?);
                if book.job(id.as_str()).is_some() {
                    return Err(DocumentError::new(r.line, format!("duplicate job `{id}`")));
                }
                let priority = r.opt("prio")?.ok_or_else(|| DocumentError::new(r.line, "job needs prio="))?;
                let nights = r
                    .opt::<String>("nights")?
                    .map(|csv| csv.split(',').filter(|s| !s.is_empty()).map(Night::new).collect())
                    .unwrap_or_default();
                book.jobs.push(Job {
                    id,
                    priority,
                    nights,
                    variants: Vec::new(),
                    owner: r.opt("owner")?.unwrap_or(Owner::InHouse),
                });
            }
            "variant" => {
                r.expect_arity(1, 1)?;
                let mut allowed = crafts.clone();
                allowed.extend(["isolation", "outage", "progress"]);
                r.reject_unknown_options(&allowed)?;
                let job = book
                    .jobs
                    .last_mut()
                    .ok_or_else(|| DocumentError::new(r.line, "`variant` before any `job`"))?;
                let progress: f64 = r.opt("progress")?.unwrap_or(1.0);
                if progress <= 0.0 {
                    return Err(DocumentError::new(r.line, "progress must be positive"));
                }
                job.variants.push(JobVariant {
                    label: r.parse_arg(0, "variant label")?,
                    demand: Crew::from_record(r)?,
                    isolation: r.opt::<String>("isolation")?.map(RequestId::new),
                    track_outage_needed: r.flag("outage")?.unwrap_or(false),
                    expected_progress: progress,
                });
            }
            "isolation" => {
                r.expect_arity(1, 1)?;
                r.reject_unknown_options(&crafts)?;
                book.isolation_overhead.insert(RequestId::new(r.arg(0, "request id")?), Crew::from_record(r)?);
            }
            other => return Err(DocumentError::new(r.line, format!("unknown jobs record `{other}`"))),
        }
    }
    for j in &book.jobs {
        if j.variants.is_empty() {
            return Err(DocumentError::new(0, format!("job `{}` has no variants", j.id)));
        }
    }
    Ok(book)
}
