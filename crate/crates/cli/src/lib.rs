//! Batch command-line front end: `traction <verb> ...`.
//!
//! Exit codes: 0 success, 1 domain error (validation, interlock, infeasible
//! plan, no plate order), 2 usage error (bad flags, unreadable files, empty
//! requests). Domain errors print `error: <CODE> [participants] detail` on
//! the error stream.
//!
//! `--format records` prints the engine's own document formats, which the
//! other verbs accept back as inputs; `--format table` (the default) prints
//! human-readable reports.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use traction_isolation::energization::{compute_energization_with, EnergizationConfig, EnergizationResult, DEFAULT_UNBALANCE_FACTOR};
use traction_isolation::ids::{NodeId, PersonId};
use traction_isolation::plate_orders::{coverage_check, select_plate_order, Coverage};
use traction_isolation::scheduler::{apply_disruption, build_weekly_plan, parse_calendar, parse_jobs, Disruption, PipelineStage, PlanningContext, WeeklyPlan};
use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{
    apply_op, execute_op, parse_orders, parse_requests, IsolationRequest, OpContext, OpOutcome, OperatingOrder, OrderPhase, PlanError,
    PlanOptions, SwitchOp,
};
use traction_isolation::timeline::{compose_night, parse_night_setup, phase_inputs_for, work_window_report, SimMode, TimelineReport};
use traction_isolation::topology::{load_topology, wire_run_check, NetworkTopology};

#[derive(Parser, Debug)]
#[command(name = "traction", version, about = "Traction-power isolation planning and simulation")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Records,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a network and report over-long wire runs.
    Validate { net: PathBuf },
    /// Energization partition and violations of a switching state.
    Energize {
        net: PathBuf,
        state: PathBuf,
        /// UNBALANCE fires when a source's score exceeds this multiple of the mean.
        #[arg(long, default_value_t = DEFAULT_UNBALANCE_FACTOR)]
        unbalance_factor: f64,
    },
    /// Plan an isolation and print its operating orders.
    Isolate {
        net: PathBuf,
        state: PathBuf,
        request: PathBuf,
        /// Plate-order coverage required beyond the target ends.
        #[arg(long, default_value_t = 0)]
        margin_ft: i64,
        /// Directing Power Director named on the forms.
        #[arg(long, default_value = "PD1")]
        director: String,
    },
    /// Select the plate order for a request and show its coverage.
    PlateOrder {
        net: PathBuf,
        request: PathBuf,
        #[arg(long, default_value_t = 0)]
        margin_ft: i64,
    },
    /// Build the weekly plan.
    Schedule {
        net: PathBuf,
        jobs: PathBuf,
        calendar: PathBuf,
        /// Isolation requests referenced by the jobs; planned against `--state`
        /// (or the normal state) to decide which isolation variants can run.
        #[arg(long)]
        requests: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Advance the finished plan through the pipeline to this stage.
        #[arg(long)]
        stage: Option<String>,
    },
    /// Apply a disruption to an approved weekly plan and print the diff.
    Disrupt {
        plan: PathBuf,
        /// The event, e.g. `sick_call lineman fri 1`.
        #[arg(required = true, num_args = 1..)]
        event: Vec<String>,
    },
    /// Simulate a night's timeline.
    Simulate {
        net: PathBuf,
        /// A request (planned from `--state` or the normal state) or an
        /// operating-order document.
        plan: PathBuf,
        window: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Use expected durations instead of sampling.
        #[arg(long)]
        expected: bool,
        /// Simulate this many sampled nights (seeds seed, seed+1, ...) concurrently.
        #[arg(long)]
        nights: Option<u32>,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Serve the control room over HTTP.
    Serve {
        net: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:7878")]
        bind: String,
        /// Number of control rooms sharing the network.
        #[arg(long, default_value_t = 1)]
        rooms: usize,
    },
    /// Re-execute a recorded operating order.
    Replay {
        orderlog: PathBuf,
        /// The network the order was worked on.
        #[arg(long)]
        net: PathBuf,
        /// Starting state (default: the network's normal state).
        #[arg(long)]
        state: Option<PathBuf>,
        /// Apply ops without the interlocks and report what results.
        #[arg(long)]
        no_interlock: bool,
    },
}

/// A failed command.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain { code: String, participants: Vec<String>, detail: String },
}

impl CliError {
    fn domain(code: &str, detail: impl Into<String>) -> Self {
        CliError::Domain { code: code.to_owned(), participants: Vec::new(), detail: detail.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain { code, participants, detail } if participants.is_empty() => write!(f, "error: {code} {detail}"),
            CliError::Domain { code, participants, detail } => write!(f, "error: {code} [{}] {detail}", participants.join(",")),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        if e.is_request_error() {
            return CliError::Usage(e.to_string());
        }
        let participants = match &e {
            PlanError::CannotDeenergize { participants, .. } => participants.clone(),
            _ => Vec::new(),
        };
        CliError::Domain { code: e.code().to_owned(), participants, detail: e.to_string() }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn topology(path: &Path) -> Result<NetworkTopology> {
    load_topology(&read(path)?).map_err(|e| CliError::domain("INVALID_NETWORK", format!("{}: {e}", path.display())))
}

fn state(topo: &NetworkTopology, path: Option<&Path>) -> Result<SwitchingState> {
    match path {
        None => Ok(SwitchingState::normal(topo)),
        Some(p) => SwitchingState::from_document(topo, &read(p)?)
            .map_err(|e| CliError::domain("INVALID_STATE", format!("{}: {e}", p.display()))),
    }
}

fn requests(path: &Path) -> Result<Vec<IsolationRequest>> {
    let reqs = parse_requests(&read(path)?).map_err(|e| CliError::domain("INVALID_REQUEST", format!("{}: {e}", path.display())))?;
    if reqs.is_empty() {
        return Err(CliError::Usage(format!("{} holds no request", path.display())));
    }
    for r in &reqs {
        if r.target_sections.is_empty() {
            return Err(CliError::Usage(format!("request {} has an empty target set", r.id)));
        }
    }
    Ok(reqs)
}

fn execute(cli: &Cli) -> Result<String> {
    let records = cli.format == Format::Records;
    match &cli.command {
        Command::Validate { net } => validate(net, records),
        Command::Energize { net, state: s, unbalance_factor } => {
            let topo = topology(net)?;
            let st = state(&topo, Some(s))?;
            let e = compute_energization_with(&topo, &st, &EnergizationConfig { unbalance_factor: *unbalance_factor })
                .map_err(|e| CliError::domain("INVALID_STATE", e.to_string()))?;
            Ok(energization_report(&topo, &st, &e, records))
        }
        Command::Isolate { net, state: s, request, margin_ft, director } => {
            let topo = topology(net)?;
            let st = state(&topo, Some(s))?;
            let opts = PlanOptions { director: PersonId::new(director.as_str()), margin_ft: *margin_ft, ..PlanOptions::default() };
            let mut text = String::new();
            for req in requests(request)? {
                let plan = traction_isolation::switching::plan_isolation_with(&topo, &st, &req, &opts)?;
                if !records {
                    let _ = writeln!(text, "{plan}");
                }
                for form in plan.forms.iter().chain(&plan.restore_forms) {
                    text.push_str(&form.to_document());
                    text.push('\n');
                }
            }
            Ok(text)
        }
        Command::PlateOrder { net, request, margin_ft } => {
            let topo = topology(net)?;
            let mut text = String::new();
            for req in requests(request)? {
                let order = select_plate_order(topo.plate_library(), &topo, &req, *margin_ft)
                    .map_err(|e| CliError::domain(e.code(), e.to_string()))?;
                let coverage = coverage_check(&topo, order, &req, *margin_ft);
                if records {
                    let _ = writeln!(text, "request: {}\nplate_order: {}\ncoverage: {}", req.id, order.id, coverage_word(&coverage));
                } else {
                    let _ = writeln!(text, "{}: plate order {} \"{}\" ({}, margin {} ft)", req.id, order.id, order.description, coverage_word(&coverage), margin_ft);
                    let blocked: Vec<String> = order.blocked_switches.iter().map(|s| s.to_string()).collect();
                    let _ = writeln!(text, "  blocks switches {}", blocked.join(" "));
                }
            }
            Ok(text)
        }
        Command::Schedule { net, jobs, calendar, requests: reqs, state: s, stage } => {
            let topo = topology(net)?;
            let jobs = parse_jobs(&read(jobs)?).map_err(|e| CliError::domain("INVALID_JOBS", e.to_string()))?;
            let cal = parse_calendar(&read(calendar)?).map_err(|e| CliError::domain("INVALID_CALENDAR", e.to_string()))?;
            let st = state(&topo, s.as_deref())?;
            let reqs = match reqs {
                Some(p) => requests(p)?,
                None => Vec::new(),
            };
            let ctx = (!reqs.is_empty()).then(|| PlanningContext::new(&topo, &st, &reqs));
            let mut plan = build_weekly_plan(&jobs, &cal, ctx.as_ref()).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            if let Some(stage) = stage {
                let stage: PipelineStage = stage.parse().map_err(CliError::Usage)?;
                plan.advance_to(stage).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            }
            Ok(if records { plan.to_document() } else { plan_table(&plan) })
        }
        Command::Disrupt { plan, event } => {
            let plan = WeeklyPlan::parse(&read(plan)?).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            let event: Disruption = event.join(" ").parse().map_err(|e: traction_isolation::DocumentError| CliError::Usage(e.to_string()))?;
            let (next, diff) = apply_disruption(&plan, &event).map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            let mut text = String::new();
            if records {
                text.push_str(&next.to_document());
                for d in &diff {
                    let _ = writeln!(text, "# diff {d}");
                }
            } else {
                let _ = writeln!(text, "{event}: {} change(s)", diff.len());
                for d in &diff {
                    let _ = writeln!(text, "  {d}");
                }
            }
            Ok(text)
        }
        Command::Simulate { net, plan, window, seed, expected, nights, state: s } => {
            let topo = topology(net)?;
            let (isolation, restore) = plan_ops(&topo, plan, s.as_deref())?;
            let (window, mut model) = parse_night_setup(&read(window)?).map_err(|e| CliError::domain("INVALID_WINDOW", e.to_string()))?;
            if let Some(seed) = seed {
                model.seed = *seed;
            }
            let mode = if *expected { SimMode::Expected } else { SimMode::Sampled };
            let count = nights.unwrap_or(1).max(1);
            // Independent nights fan out on their own threads.
            let reports: Vec<TimelineReport> = std::thread::scope(|scope| {
                let handles: Vec<_> = (0..count)
                    .map(|k| {
                        let (topo, isolation, restore) = (&topo, &isolation, &restore);
                        let mut model = model.clone();
                        let mut window = window.clone();
                        model.seed = model.seed.wrapping_add(k as u64);
                        if count > 1 {
                            window.night = format!("{}#{}", window.night, k + 1);
                        }
                        scope.spawn(move || compose_night(&window, phase_inputs_for(topo, isolation, restore, &model, mode)))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("simulation thread")).collect()
            });
            let mut text = String::new();
            for r in &reports {
                if records {
                    text.push_str(&r.to_csv());
                } else {
                    let _ = writeln!(text, "{}\n{r}\n", r.window.night);
                }
            }
            if count > 1 && !records {
                if let Some(agg) = work_window_report(&reports) {
                    let _ = writeln!(text, "{agg}");
                }
            }
            if reports.iter().any(|r| r.infeasible) {
                return Err(CliError::domain("INFEASIBLE_WINDOW", format!("the window cannot hold the switching\n{text}")));
            }
            Ok(text)
        }
        Command::Serve { net, state: s, bind, rooms } => {
            let topo = Arc::new(topology(net)?);
            let st = state(&topo, s.as_deref())?;
            let service = traction_service::Service::with_rooms(topo, &st, *rooms)
                .map_err(|e| CliError::domain(e.code(), e.to_string()))?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(e.to_string()))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(bind.as_str()).await.map_err(|e| CliError::Usage(format!("bind {bind}: {e}")))?;
                eprintln!("serving {} room(s) on http://{}", service.room_count(), listener.local_addr().map_err(|e| CliError::Usage(e.to_string()))?);
                traction_service::serve(listener, service).await.map_err(|e| CliError::Usage(e.to_string()))
            })?;
            Ok(String::new())
        }
        Command::Replay { orderlog, net, state: s, no_interlock } => {
            let topo = topology(net)?;
            let st = state(&topo, s.as_deref())?;
            let orders = parse_orders(&read(orderlog)?).map_err(|e| CliError::domain("INVALID_ORDER", e.to_string()))?;
            replay(&topo, st, &orders, *no_interlock, records)
        }
    }
}

fn coverage_word(c: &Coverage) -> String {
    match c {
        Coverage::Covered => "covered".into(),
        Coverage::Gaps(g) => format!("gaps {}", g.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("; ")),
    }
}

fn validate(net: &Path, records: bool) -> Result<String> {
    let text = read(net)?;
    let topo = match load_topology(&text) {
        Ok(t) => t,
        Err(e) => {
            let issues: Vec<String> = e.issues().iter().map(|i| i.to_string()).collect();
            let detail = if issues.is_empty() { e.to_string() } else { issues.join("\n  ") };
            return Err(CliError::domain("INVALID_NETWORK", format!("{}:\n  {detail}", net.display())));
        }
    };
    let runs = wire_run_check(&topo);
    if !runs.is_empty() {
        let mut detail = String::new();
        for r in &runs {
            let ids: Vec<&str> = r.sections.iter().map(|s| s.as_str()).collect();
            let _ = write!(detail, "\n  track {} {}..{} ft ({} ft): {}", r.track, r.start_ft, r.end_ft, r.length_ft, ids.join(" "));
        }
        return Err(CliError::Domain {
            code: "WIRE_RUN_EXCEEDED".into(),
            participants: runs.iter().map(|r| r.track.to_string()).collect(),
            detail: format!("{} continuous run(s) over two miles{detail}", runs.len()),
        });
    }
    if records {
        return Ok(topo.to_document());
    }
    Ok(format!("{}\nwire runs: all within two miles\n", topo.summary()))
}

fn join_nodes(s: &std::collections::BTreeSet<NodeId>) -> String {
    s.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" ")
}

fn energization_report(topo: &NetworkTopology, st: &SwitchingState, e: &EnergizationResult, records: bool) -> String {
    let mut out = String::new();
    if records {
        out.push_str(&st.to_document(topo));
        // The partition rides along as comments so the output stays a state document.
        let _ = writeln!(out, "# energized: {}", join_nodes(&e.energized));
        let _ = writeln!(out, "# dead: {}", join_nodes(&e.dead));
        let _ = writeln!(out, "# grounded: {}", join_nodes(&e.grounded));
        for v in &e.violations {
            let _ = writeln!(out, "# violation: {} {}", v.kind.code(), v.participants.join(","));
        }
        return out;
    }
    let _ = writeln!(out, "energized ({}): {}", e.energized.len(), join_nodes(&e.energized));
    let _ = writeln!(out, "dead      ({}): {}", e.dead.len(), join_nodes(&e.dead));
    let _ = writeln!(out, "grounded  ({}): {}", e.grounded.len(), join_nodes(&e.grounded));
    if !e.source_scores.is_empty() {
        let scores: Vec<String> = e.source_scores.iter().map(|(s, v)| format!("{s}={v:.2}")).collect();
        let _ = writeln!(out, "source scores: {}", scores.join(" "));
    }
    if e.violations.is_empty() {
        let _ = writeln!(out, "violations: none");
    }
    for v in &e.violations {
        let _ = writeln!(out, "violation {v}");
    }
    out
}

fn plan_table(plan: &WeeklyPlan) -> String {
    let mut out = format!("stage {}\n", plan.pipeline_stage);
    let _ = writeln!(out, "{:<6} {:<8} {:>4}  assignment", "night", "job", "prio");
    for (night, job, a) in plan.ordered_assignments() {
        let _ = writeln!(out, "{:<6} {:<8} {:>4}  {a}", night.to_string(), job.id.to_string(), job.priority);
    }
    for v in plan.feasibility_violations() {
        let _ = writeln!(out, "INFEASIBLE {v}");
    }
    out
}

/// Isolation and restore op lists for `simulate`: a request document is
/// planned; an order document is used as written.
fn plan_ops(topo: &NetworkTopology, path: &Path, state_path: Option<&Path>) -> Result<(Vec<SwitchOp>, Vec<SwitchOp>)> {
    let text = read(path)?;
    let is_orders = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).is_some_and(|l| l.starts_with("order "));
    let (mut iso, mut restore) = (Vec::new(), Vec::new());
    if is_orders {
        let orders = parse_orders(&text).map_err(|e| CliError::domain("INVALID_ORDER", e.to_string()))?;
        for o in orders {
            match o.phase {
                OrderPhase::Isolation => iso.extend(o.ops),
                OrderPhase::Restore => restore.extend(o.ops),
            }
        }
    } else {
        let st = state(topo, state_path)?;
        for req in requests(path)? {
            let plan = traction_isolation::switching::plan_isolation(topo, &st, &req)?;
            iso.extend(plan.isolation_sequence().into_iter().cloned());
            restore.extend(plan.restore_sequence().into_iter().cloned());
        }
    }
    iso.sort_by_key(|o| o.seq);
    restore.sort_by_key(|o| o.seq);
    Ok((iso, restore))
}

/// Re-executes the recorded ops of `orders` in sequence order and compares
/// each outcome with its record.
fn replay(topo: &NetworkTopology, mut st: SwitchingState, orders: &[OperatingOrder], no_interlock: bool, records: bool) -> Result<String> {
    let mut ops: Vec<(&OperatingOrder, &SwitchOp, &str)> = Vec::new();
    for o in orders {
        for (op, rec) in o.ops.iter().zip(&o.records) {
            ops.push((o, op, rec.result.as_str()));
        }
    }
    if ops.is_empty() {
        return Err(CliError::Usage("the order log records no executed ops".into()));
    }
    ops.sort_by_key(|(_, op, _)| op.seq);
    let mut tested: std::collections::BTreeMap<&str, std::collections::BTreeSet<NodeId>> = Default::default();
    let mut log = String::new();
    let mut mismatches = Vec::new();
    for (order, op, recorded) in ops {
        let mut ctx = OpContext::new(order.director.clone());
        ctx.tested_dead = tested.get(order.id.as_str()).cloned().unwrap_or_default();
        let (next, outcome) = if no_interlock {
            apply_op(topo, &st, op, &ctx)
        } else {
            execute_op(topo, &st, op, &ctx).map_err(|e| CliError::Domain {
                code: e.kind.code().to_owned(),
                participants: e.participants.clone(),
                detail: format!("op {} {} {} of {}: {e}", op.seq, op.kind, op.target, order.id),
            })?
        };
        if let OpOutcome::TestedDead(nodes) = &outcome {
            tested.entry(order.id.as_str()).or_default().extend(nodes.iter().cloned());
        }
        let result = outcome.label();
        if result != recorded {
            mismatches.push(format!("op {} {} {}: recorded {recorded}, replayed {result}", op.seq, op.kind, op.target));
        }
        if !records {
            let _ = writeln!(log, "{:>4} {:<15} {:<10} {:<14} {result}", op.seq, op.kind.to_string(), op.target, op.actor.to_string());
        }
        st = next;
    }
    let e = compute_energization_with(topo, &st, &EnergizationConfig::default()).map_err(|e| CliError::domain("INVALID_STATE", e.to_string()))?;
    let mut out = log;
    if !records {
        out.push('\n');
    }
    out.push_str(&energization_report(topo, &st, &e, records));
    if !mismatches.is_empty() {
        return Err(CliError::domain("REPLAY_MISMATCH", format!("{}\n{out}", mismatches.join("\n"))));
    }
    if no_interlock && e.safety_violations().next().is_some() {
        let kinds: Vec<String> = e.safety_violations().map(|v| v.to_string()).collect();
        return Err(CliError::domain("UNSAFE_RESULT", format!("{}\n{out}", kinds.join("; "))));
    }
    Ok(out)
}
