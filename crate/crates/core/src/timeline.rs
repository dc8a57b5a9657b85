//! Night timeline simulation: how much of the nominal outage window is left
//! for contractor work once service clears, track is removed, switching and
//! briefing are done, and restoration is reserved at the end.
//!
//! Window documents:
//!
//! ```text
//! window night=<name> start=HH:MM end=HH:MM clear=HH:MM [extension=<min>]
//! durations [remote_min_s=30] [remote_max_s=90] [manual_min_s=30] [manual_base_min=5]
//!           [manual_cap_min=15] [track_removal_min=30] [briefing_min=10] [seed=<n>]
//!           [remote_total_min=<m>] [field_total_min=<m>] [restoration_total_min=<m>]
//! ```
//!
//! The `*_total_min` keys replace the per-op durations of a phase with a
//! fixed total (used when only phase totals are known).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energization::compute_energization;
use crate::records::{parse_records, DocumentError, Record};
use crate::state::SwitchingState;
use crate::switching::{apply_op, Actor, IsolationPlan, OpContext, OpKind, SwitchOp};
use crate::topology::NetworkTopology;

const DAY_S: i64 = 24 * 3600;

/// Seconds after midnight of the night's first day; values past 24 h are the
/// next morning.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClockTime(pub i64);

impl ClockTime {
    pub fn hm(h: i64, m: i64) -> Self {
        ClockTime(h * 3600 + m * 60)
    }

    /// The same wall-clock time moved to fall at or after `reference`.
    pub fn after(self, reference: ClockTime) -> ClockTime {
        let mut t = self.0.rem_euclid(DAY_S);
        while t < reference.0 {
            t += DAY_S;
        }
        ClockTime(t)
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.0.rem_euclid(DAY_S);
        let (h, m, s) = (t / 3600, t / 60 % 60, t % 60);
        if s == 0 {
            write!(f, "{h:02}:{m:02}")
        } else {
            write!(f, "{h:02}:{m:02}:{s:02}")
        }
    }
}

impl FromStr for ClockTime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str, max: i64| -> Result<i64, String> {
            p.parse::<i64>().ok().filter(|v| (0..max).contains(v)).ok_or_else(|| format!("bad clock time `{s}`"))
        };
        match parts.as_slice() {
            [h, m] => Ok(ClockTime(num(h, 24)? * 3600 + num(m, 60)? * 60)),
            [h, m, sec] => Ok(ClockTime(num(h, 24)? * 3600 + num(m, 60)? * 60 + num(sec, 60)?)),
            _ => Err(format!("bad clock time `{s}`, expected HH:MM")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NightWindow {
    pub night: String,
    pub nominal_start: ClockTime,
    /// Normalised to fall after `nominal_start`.
    pub nominal_end: ClockTime,
    /// When trains stop using the affected tracks; at or after `nominal_start`.
    pub service_clear: ClockTime,
    pub extension_granted_min: Option<u32>,
}

impl NightWindow {
    /// Wall-clock times; `end` and `clear` roll into the next morning as needed.
    pub fn new(night: impl Into<String>, start: ClockTime, end: ClockTime, clear: ClockTime) -> Self {
        Self {
            night: night.into(),
            nominal_start: start,
            nominal_end: end.after(ClockTime(start.0 + 1)),
            service_clear: clear.after(start),
            extension_granted_min: None,
        }
    }

    pub fn with_extension(mut self, minutes: u32) -> Self {
        self.extension_granted_min = Some(minutes);
        self
    }

    pub fn nominal_s(&self) -> i64 {
        self.nominal_end.0 - self.nominal_start.0
    }

    /// Latest time the line may reopen, including any extension.
    pub fn hard_end(&self) -> ClockTime {
        ClockTime(self.nominal_end.0 + 60 * self.extension_granted_min.unwrap_or(0) as i64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DurationModel {
    pub remote_min_s: u32,
    pub remote_max_s: u32,
    /// Shortest field op in sampled mode.
    pub manual_min_s: u32,
    pub manual_base_min: u32,
    /// Base plus travel never exceeds this.
    pub manual_cap_min: u32,
    pub track_removal_min: u32,
    pub briefing_min: u32,
    pub seed: u64,
    pub remote_total_min: Option<u32>,
    pub field_total_min: Option<u32>,
    pub restoration_total_min: Option<u32>,
}

impl Default for DurationModel {
    fn default() -> Self {
        Self {
            remote_min_s: 30,
            remote_max_s: 90,
            manual_min_s: 30,
            manual_base_min: 5,
            manual_cap_min: 15,
            track_removal_min: 30,
            briefing_min: 10,
            seed: 0,
            remote_total_min: None,
            field_total_min: None,
            restoration_total_min: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TimelineError {
    #[error("invalid duration model: {0}")]
    InvalidModel(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("{0}")]
    Document(#[from] DocumentError),
}

impl DurationModel {
    pub fn validate(&self) -> Result<(), TimelineError> {
        if self.remote_min_s > self.remote_max_s {
            return Err(TimelineError::InvalidModel("remote_min_s > remote_max_s".into()));
        }
        if self.manual_min_s > self.manual_cap_min * 60 {
            return Err(TimelineError::InvalidModel("manual_min_s exceeds the manual cap".into()));
        }
        Ok(())
    }

    /// Expected duration of a field op with the given travel time.
    pub fn expected_manual_s(&self, travel_min: u32) -> u32 {
        (self.manual_base_min + travel_min).min(self.manual_cap_min) * 60
    }

    /// Expected remote duration: the midpoint.
    pub fn expected_remote_s(&self) -> u32 {
        (self.remote_min_s + self.remote_max_s) / 2
    }

    /// Sampled field-op range: centred on the expected duration where the cap allows.
    pub fn manual_range_s(&self, travel_min: u32) -> (u32, u32) {
        let expected = self.expected_manual_s(travel_min);
        let lo = self.manual_min_s.min(expected);
        let hi = (2 * expected).saturating_sub(lo).clamp(lo, self.manual_cap_min * 60);
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SimMode {
    Expected,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseName {
    ServiceResidual,
    TrackRemoval,
    RemoteSwitching,
    FieldSwitching,
    Briefing,
    ContractorWork,
    Restoration,
}

impl PhaseName {
    pub const ALL: [PhaseName; 7] = [
        PhaseName::ServiceResidual,
        PhaseName::TrackRemoval,
        PhaseName::RemoteSwitching,
        PhaseName::FieldSwitching,
        PhaseName::Briefing,
        PhaseName::ContractorWork,
        PhaseName::Restoration,
    ];
}

impl fmt::Display for PhaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseName::ServiceResidual => "service_residual",
            PhaseName::TrackRemoval => "track_removal",
            PhaseName::RemoteSwitching => "remote_switching",
            PhaseName::FieldSwitching => "field_switching",
            PhaseName::Briefing => "briefing",
            PhaseName::ContractorWork => "contractor_work",
            PhaseName::Restoration => "restoration",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Phase {
    pub name: PhaseName,
    pub start: ClockTime,
    pub end: ClockTime,
}

impl Phase {
    pub fn duration_s(&self) -> i64 {
        self.end.0 - self.start.0
    }
}

/// The drawn or expected duration of every op, by phase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhaseInputs {
    pub track_removal_s: i64,
    pub remote_ops_s: Vec<i64>,
    pub field_ops_s: Vec<i64>,
    pub briefing_s: i64,
    pub restoration_ops_s: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimelineReport {
    pub window: NightWindow,
    pub phases: Vec<Phase>,
    pub on_track_s: i64,
    pub opened_to_traffic: ClockTime,
    /// INFEASIBLE_WINDOW: switching, briefing and restoration do not fit.
    pub infeasible: bool,
    pub inputs: PhaseInputs,
}

impl TimelineReport {
    pub fn phase(&self, name: PhaseName) -> &Phase {
        self.phases.iter().find(|p| p.name == name).expect("every phase is reported")
    }

    pub fn on_track_min(&self) -> f64 {
        self.on_track_s as f64 / 60.0
    }

    /// `<night>,<phase>,<start>,<end>,<minutes>` per phase, then a summary row
    /// `<night>,summary,<nominal start>,<opened to traffic>,<on-track minutes>`
    /// (`summary:INFEASIBLE_WINDOW` when the window cannot hold the work).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let night = &self.window.night;
        for p in &self.phases {
            let _ = writeln!(out, "{night},{},{},{},{}", p.name, p.start, p.end, fmt_minutes(p.duration_s()));
        }
        let label = if self.infeasible { "summary:INFEASIBLE_WINDOW" } else { "summary" };
        let _ = writeln!(
            out,
            "{night},{label},{},{},{}",
            self.window.nominal_start,
            self.opened_to_traffic,
            fmt_minutes(self.on_track_s)
        );
        out
    }
}

impl fmt::Display for TimelineReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<18} {:>8} {:>8} {:>8}", "phase", "start", "end", "minutes")?;
        for p in &self.phases {
            writeln!(f, "{:<18} {:>8} {:>8} {:>8}", p.name.to_string(), p.start.to_string(), p.end.to_string(), fmt_minutes(p.duration_s()))?;
        }
        writeln!(f, "on_track = {} min ({})", fmt_minutes(self.on_track_s), fmt_hm(self.on_track_s))?;
        write!(f, "opened_to_traffic = {}", self.opened_to_traffic)?;
        if self.infeasible {
            write!(f, "\nINFEASIBLE_WINDOW")?;
        }
        Ok(())
    }
}

pub fn fmt_minutes(seconds: i64) -> String {
    if seconds % 60 == 0 {
        (seconds / 60).to_string()
    } else {
        format!("{:.2}", seconds as f64 / 60.0)
    }
}

pub fn fmt_hm(seconds: i64) -> String {
    format!("{}h{:02}", seconds / 3600, seconds / 60 % 60)
}

/// Lays the phases end to end. Contractor work runs from the end of the
/// briefing until restoration must start to reopen by the window's hard end;
/// if nothing is left the work phase is empty, restoration follows the
/// briefing directly and the report is flagged infeasible.
pub fn compose_night(window: &NightWindow, inputs: PhaseInputs) -> TimelineReport {
    let restoration_s: i64 = inputs.restoration_ops_s.iter().sum();
    let durations = [
        (PhaseName::ServiceResidual, window.service_clear.0 - window.nominal_start.0),
        (PhaseName::TrackRemoval, inputs.track_removal_s),
        (PhaseName::RemoteSwitching, inputs.remote_ops_s.iter().sum()),
        (PhaseName::FieldSwitching, inputs.field_ops_s.iter().sum()),
        (PhaseName::Briefing, inputs.briefing_s),
    ];
    let mut phases = Vec::with_capacity(7);
    let mut t = window.nominal_start.0;
    for (name, d) in durations {
        phases.push(Phase { name, start: ClockTime(t), end: ClockTime(t + d) });
        t += d;
    }
    let work_end = window.hard_end().0 - restoration_s;
    let on_track_s = (work_end - t).max(0);
    phases.push(Phase { name: PhaseName::ContractorWork, start: ClockTime(t), end: ClockTime(t + on_track_s) });
    t += on_track_s;
    phases.push(Phase { name: PhaseName::Restoration, start: ClockTime(t), end: ClockTime(t + restoration_s) });
    t += restoration_s;
    TimelineReport {
        window: window.clone(),
        phases,
        on_track_s,
        opened_to_traffic: ClockTime(t),
        infeasible: on_track_s == 0,
        inputs,
    }
}

fn op_duration_s(topology: &NetworkTopology, model: &DurationModel, mode: SimMode, rng: &mut ChaCha8Rng, op: &SwitchOp) -> i64 {
    let s = match op.actor {
        Actor::RemoteScada => match mode {
            SimMode::Expected => model.expected_remote_s(),
            SimMode::Sampled => rng.gen_range(model.remote_min_s..=model.remote_max_s),
        },
        Actor::FieldLineman => {
            let travel = topology.device(&op.target).map_or(0, |d| d.travel_minutes);
            match mode {
                SimMode::Expected => model.expected_manual_s(travel),
                SimMode::Sampled => {
                    let (lo, hi) = model.manual_range_s(travel);
                    rng.gen_range(lo..=hi)
                }
            }
        }
    };
    s as i64
}

/// Durations for every op of `plan`, remote ops first then field ops, then
/// the restore sequence, drawn in that order from the model's seed.
pub fn phase_inputs(topology: &NetworkTopology, plan: &IsolationPlan, model: &DurationModel, mode: SimMode) -> PhaseInputs {
    phase_inputs_for(
        topology,
        &plan.isolation_sequence().into_iter().cloned().collect::<Vec<_>>(),
        &plan.restore_sequence().into_iter().cloned().collect::<Vec<_>>(),
        model,
        mode,
    )
}

/// As [`phase_inputs`] for explicit op lists.
pub fn phase_inputs_for(
    topology: &NetworkTopology,
    isolation: &[SwitchOp],
    restore: &[SwitchOp],
    model: &DurationModel,
    mode: SimMode,
) -> PhaseInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let mut draw = |ops: &mut dyn Iterator<Item = &SwitchOp>| -> Vec<i64> {
        ops.map(|op| op_duration_s(topology, model, mode, &mut rng, op)).collect()
    };
    let remote = draw(&mut isolation.iter().filter(|o| o.actor == Actor::RemoteScada));
    let field = draw(&mut isolation.iter().filter(|o| o.actor == Actor::FieldLineman));
    let restoration = draw(&mut restore.iter());
    let fixed = |total: Option<u32>, ops: Vec<i64>| match total {
        Some(m) => vec![m as i64 * 60],
        None => ops,
    };
    PhaseInputs {
        track_removal_s: model.track_removal_min as i64 * 60,
        remote_ops_s: fixed(model.remote_total_min, remote),
        field_ops_s: fixed(model.field_total_min, field),
        briefing_s: model.briefing_min as i64 * 60,
        restoration_ops_s: fixed(model.restoration_total_min, restoration),
    }
}

pub fn simulate_night(
    topology: &NetworkTopology,
    plan: &IsolationPlan,
    window: &NightWindow,
    model: &DurationModel,
    mode: SimMode,
) -> Result<TimelineReport, TimelineError> {
    model.validate()?;
    Ok(compose_night(window, phase_inputs(topology, plan, model, mode)))
}

/// Replays the isolation sequence from `state` and reports every instant at
/// which a parked train's pantograph bridge touches a de-energized node.
pub fn train_route_check(topology: &NetworkTopology, state: &SwitchingState, plan: &IsolationPlan) -> Vec<String> {
    let mut problems = Vec::new();
    let mut s = state.clone();
    let ctx = OpContext::default();
    let mut check = |s: &SwitchingState, at: &str| {
        if s.pantograph_bridges.is_empty() {
            return;
        }
        let Ok(e) = compute_energization(topology, s) else { return };
        for (a, b) in &s.pantograph_bridges {
            for n in [a, b] {
                if !e.is_energized(n) {
                    problems.push(format!("{at}: bridge {a}-{b} touches dead node {n}"));
                }
            }
        }
    };
    check(&s, "initial");
    for op in plan.isolation_sequence() {
        s = apply_op(topology, &s, op, &ctx).0;
        if op.kind != OpKind::TestPotential {
            check(&s, &format!("after {} {} {}", op.seq, op.kind, op.target));
        }
    }
    problems
}

/// One row of the work-window table.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowRow {
    pub night: String,
    pub nominal_s: f64,
    pub on_track_s: f64,
    pub phase_s: BTreeMap<PhaseName, f64>,
}

impl WindowRow {
    pub fn ratio(&self) -> f64 {
        if self.nominal_s == 0.0 {
            0.0
        } else {
            self.on_track_s / self.nominal_s
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowAggregate {
    pub nights: Vec<WindowRow>,
    pub mean: WindowRow,
    /// Mean on-track time over mean nominal window.
    pub effective_ratio: f64,
}

impl fmt::Display for WindowAggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<10} {:>8} {:>8} {:>7}", "night", "nominal", "on_track", "ratio")?;
        for p in PhaseName::ALL {
            write!(f, " {:>8}", short(p))?;
        }
        writeln!(f)?;
        for row in self.nights.iter().chain(std::iter::once(&self.mean)) {
            write!(
                f,
                "{:<10} {:>8} {:>8} {:>6.1}%",
                row.night,
                fmt_hm(row.nominal_s.round() as i64),
                fmt_hm(row.on_track_s.round() as i64),
                100.0 * row.ratio()
            )?;
            for p in PhaseName::ALL {
                write!(f, " {:>8.1}", row.phase_s.get(&p).copied().unwrap_or(0.0) / 60.0)?;
            }
            writeln!(f)?;
        }
        write!(f, "effective/nominal = {:.1}%", 100.0 * self.effective_ratio)
    }
}

fn short(p: PhaseName) -> &'static str {
    match p {
        PhaseName::ServiceResidual => "service",
        PhaseName::TrackRemoval => "removal",
        PhaseName::RemoteSwitching => "remote",
        PhaseName::FieldSwitching => "field",
        PhaseName::Briefing => "briefing",
        PhaseName::ContractorWork => "work",
        PhaseName::Restoration => "restore",
    }
}

/// Per-night and mean breakdown; `None` for an empty set.
pub fn work_window_report(reports: &[TimelineReport]) -> Option<WindowAggregate> {
    if reports.is_empty() {
        return None;
    }
    let nights: Vec<WindowRow> = reports
        .iter()
        .map(|r| WindowRow {
            night: r.window.night.clone(),
            nominal_s: r.window.nominal_s() as f64,
            on_track_s: r.on_track_s as f64,
            phase_s: r.phases.iter().map(|p| (p.name, p.duration_s() as f64)).collect(),
        })
        .collect();
    let n = nights.len() as f64;
    let mean = WindowRow {
        night: "mean".into(),
        nominal_s: nights.iter().map(|r| r.nominal_s).sum::<f64>() / n,
        on_track_s: nights.iter().map(|r| r.on_track_s).sum::<f64>() / n,
        phase_s: PhaseName::ALL
            .into_iter()
            .map(|p| (p, nights.iter().map(|r| r.phase_s.get(&p).copied().unwrap_or(0.0)).sum::<f64>() / n))
            .collect(),
    };
    let effective_ratio = mean.ratio();
    Some(WindowAggregate { nights, mean, effective_ratio })
}

/// Parses a window document (see the module docs).
pub fn parse_night_setup(text: &str) -> Result<(NightWindow, DurationModel), TimelineError> {
    let mut window = None;
    let mut model = DurationModel::default();
    for r in parse_records(text)? {
        match r.keyword.as_str() {
            "window" => {
                r.reject_unknown_options(&["night", "start", "end", "clear", "extension"])?;
                let need = |k: &str| -> Result<ClockTime, DocumentError> {
                    r.opt(k)?.ok_or_else(|| DocumentError::new(r.line, format!("window needs {k}=")))
                };
                let start = need("start")?;
                let end = need("end")?;
                let clear = r.opt("clear")?.unwrap_or(start);
                let mut w = NightWindow::new(r.opt::<String>("night")?.unwrap_or_else(|| "night".into()), start, end, clear);
                w.extension_granted_min = r.opt("extension")?;
                if w.service_clear > w.nominal_end {
                    return Err(TimelineError::InvalidWindow("service clears after the window ends".into()));
                }
                window = Some(w);
            }
            "durations" => apply_duration_options(&r, &mut model)?,
            other => return Err(DocumentError::new(r.line, format!("unknown window record `{other}`")).into()),
        }
    }
    let window = window.ok_or_else(|| TimelineError::InvalidWindow("missing `window` record".into()))?;
    model.validate()?;
    Ok((window, model))
}

fn apply_duration_options(r: &Record, m: &mut DurationModel) -> Result<(), DocumentError> {
    r.reject_unknown_options(&[
        "remote_min_s",
        "remote_max_s",
        "manual_min_s",
        "manual_base_min",
        "manual_cap_min",
        "track_removal_min",
        "briefing_min",
        "seed",
        "remote_total_min",
        "field_total_min",
        "restoration_total_min",
    ])?;
    let set = |k: &str, field: &mut u32| -> Result<(), DocumentError> {
        if let Some(v) = r.opt(k)? {
            *field = v;
        }
        Ok(())
    };
    set("remote_min_s", &mut m.remote_min_s)?;
    set("remote_max_s", &mut m.remote_max_s)?;
    set("manual_min_s", &mut m.manual_min_s)?;
    set("manual_base_min", &mut m.manual_base_min)?;
    set("manual_cap_min", &mut m.manual_cap_min)?;
    set("track_removal_min", &mut m.track_removal_min)?;
    set("briefing_min", &mut m.briefing_min)?;
    if let Some(s) = r.opt("seed")? {
        m.seed = s;
    }
    if let Some(v) = r.opt("remote_total_min")? {
        m.remote_total_min = Some(v);
    }
    if let Some(v) = r.opt("field_total_min")? {
        m.field_total_min = Some(v);
    }
    if let Some(v) = r.opt("restoration_total_min")? {
        m.restoration_total_min = Some(v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure5() -> TimelineReport {
        let window = NightWindow::new("fig5", ClockTime::hm(22, 0), ClockTime::hm(5, 0), ClockTime::hm(0, 15)).with_extension(30);
        let inputs = PhaseInputs {
            track_removal_s: 30 * 60,
            remote_ops_s: vec![45 * 60],
            field_ops_s: vec![36 * 60],
            briefing_s: 0,
            restoration_ops_s: vec![45 * 60],
        };
        compose_night(&window, inputs)
    }

    #[test]
    fn figure5_composition() {
        let r = figure5();
        assert_eq!(r.phase(PhaseName::Briefing).end.to_string(), "02:06");
        assert_eq!(r.phase(PhaseName::ContractorWork).end.to_string(), "04:45");
        assert_eq!(r.on_track_s, 159 * 60);
        assert_eq!(r.opened_to_traffic.to_string(), "05:30");
        let agg = work_window_report(&[r.clone(), r]).unwrap();
        assert!((agg.effective_ratio - 159.0 / 420.0).abs() < 1e-12);
        assert_eq!(agg.mean.on_track_s, 159.0 * 60.0);
    }

    #[test]
    fn setup_document_and_infeasible_window() {
        let (w, m) = parse_night_setup(
            "window night=fri start=22:00 end=05:00 clear=00:15 extension=30\n\
             durations briefing_min=0 remote_total_min=45 field_total_min=36 restoration_total_min=45\n",
        )
        .unwrap();
        assert_eq!(w.nominal_s(), 7 * 3600);
        assert_eq!(m.remote_total_min, Some(45));
        let short = NightWindow::new("x", ClockTime::hm(22, 0), ClockTime::hm(23, 0), ClockTime::hm(22, 30));
        let r = compose_night(&short, PhaseInputs { track_removal_s: 1800, restoration_ops_s: vec![600], ..Default::default() });
        assert!(r.infeasible);
        assert_eq!(r.on_track_s, 0);
        assert!(r.to_csv().contains("summary:INFEASIBLE_WINDOW"));
    }
}
