//! One function per acceptance criterion. Each returns `Ok(summary)` when the
//! criterion holds and `Err(analysis)` when it does not, so the acceptance
//! harness can print one line per criterion and the per-module test files
//! can assert on the same checks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use traction_isolation::energization::{compute_energization, ViolationKind};
use traction_isolation::ids::*;
use traction_isolation::plate_orders::{select_plate_order, PopsEvent, PopsSession, PopsState};
use traction_isolation::scheduler::{
    apply_disruption, build_weekly_plan, parse_calendar, parse_jobs, Assignment, Disruption, PipelineStage,
    PlanningContext,
};
use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{
    execute_op, parse_requests, plan_isolation, IsolationPlan, IsolationRequest, OpContext, OpKind, OpOutcome,
    PlanError, SwitchOp, MAX_WORK_ZONE_FT,
};
use traction_isolation::timeline::{
    compose_night, parse_night_setup, phase_inputs_for, work_window_report, PhaseName, SimMode,
};
use traction_isolation::topology::{load_topology, wire_run_check, NetworkTopology, TopologyBuilder, MAX_WIRE_RUN_FT};

use super::gen::{self, NetSpec};
use super::{fixture, golden, oracle};

pub type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// Shared helpers

/// Execute `ops` in order through the interlocks, checking energization after
/// every op. Returns the final state, or the first rejection or safety
/// violation (GROUND_FAULT / PHASE_TIE).
pub fn execute_checked(
    topo: &NetworkTopology,
    state: &SwitchingState,
    ops: &[&SwitchOp],
    director: &str,
) -> Result<SwitchingState, String> {
    let mut s = state.clone();
    let mut ctx = OpContext::new(director);
    for op in ops {
        let (next, outcome) =
            execute_op(topo, &s, op, &ctx).map_err(|e| format!("op {} {} {}: {e}", op.seq, op.kind, op.target))?;
        if let OpOutcome::TestedDead(nodes) = outcome {
            ctx.tested_dead.extend(nodes);
        }
        s = next;
        let e = compute_energization(topo, &s).map_err(|e| e.to_string())?;
        let bad: Vec<String> = e
            .violations
            .iter()
            .filter(|v| matches!(v.kind, ViolationKind::GroundFault | ViolationKind::PhaseTie))
            .map(|v| format!("{} {}", v.kind.code(), v.participants.join(",")))
            .collect();
        if !bad.is_empty() {
            return Err(format!("after op {} {} {}: {}", op.seq, op.kind, op.target, bad.join("; ")));
        }
    }
    Ok(s)
}

/// Isolate then restore; `Err` unless the state comes back bit-exactly.
pub fn round_trip(topo: &NetworkTopology, state: &SwitchingState, plan: &IsolationPlan) -> Result<(), String> {
    let isolated = execute_checked(topo, state, &plan.isolation_sequence(), "PD1")?;
    let restored = execute_checked(topo, &isolated, &plan.restore_sequence(), "PD1")?;
    ensure(restored.restorable_view() == state.restorable_view(), || {
        format!("restore left {} instead of {}", restored.to_document(topo), state.to_document(topo))
    })
}

pub fn fixture_topology(rel: &str) -> NetworkTopology {
    load_topology(&fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

// ---------------------------------------------------------------------------
// 1. Figure-5 timeline replication

pub fn figure5_timeline() -> Outcome {
    let t0 = Instant::now();
    let (window, model) = parse_night_setup(&fixture("fourtrack/figure5.window")).map_err(|e| e.to_string())?;
    let topo = TopologyBuilder::new().build().map_err(|e| format!("{e:?}"))?;
    let report = compose_night(&window, phase_inputs_for(&topo, &[], &[], &model, SimMode::Expected));
    let briefing = report.phase(PhaseName::Briefing).end.to_string();
    let work_end = report.phase(PhaseName::ContractorWork).end.to_string();
    let opened = report.opened_to_traffic.to_string();
    let agg = work_window_report(std::slice::from_ref(&report)).ok_or("empty aggregate")?;
    let elapsed = t0.elapsed();
    ensure(briefing == "02:06", || format!("briefing complete at {briefing}, expected 02:06"))?;
    ensure(report.on_track_s == 159 * 60, || format!("on_track {} s, expected 159 min", report.on_track_s))?;
    ensure(work_end == "04:45", || format!("work ends {work_end}, expected 04:45"))?;
    ensure(opened == "05:30", || format!("opened to traffic {opened}, expected 05:30"))?;
    ensure(window.nominal_s() == 7 * 3600, || format!("nominal window {} s, expected 7 h", window.nominal_s()))?;
    ensure((agg.effective_ratio - 159.0 / 420.0).abs() < 1e-12, || format!("ratio {}", agg.effective_ratio))?;
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "briefing {briefing}, on_track 159 min, work to {work_end}, open {opened}, ratio {:.1}%, {:.1} ms",
        100.0 * agg.effective_ratio,
        elapsed.as_secs_f64() * 1e3
    ))
}

// ---------------------------------------------------------------------------
// 2. Five-craft gating

pub fn five_craft_gating() -> Outcome {
    let jobs = parse_jobs(&fixture("fourtrack/gating.jobs")).map_err(|e| e.to_string())?;
    let cal = parse_calendar(&fixture("fourtrack/gating.cal")).map_err(|e| e.to_string())?;
    let event: Disruption = "sick_call lineman fri 1".parse().map_err(|e: traction_isolation::DocumentError| e.to_string())?;
    let run = || -> Result<(String, String, Vec<String>), String> {
        let mut plan = build_weekly_plan(&jobs, &cal, None).map_err(|e| e.to_string())?;
        plan.advance_to(PipelineStage::Approved).map_err(|e| e.to_string())?;
        let (next, diff) = apply_disruption(&plan, &event).map_err(|e| e.to_string())?;
        let diff: Vec<String> = diff.iter().map(|d| format!("{} {} {} -> {} ({})", d.night, d.job, d.before, d.after, d.reason)).collect();
        Ok((plan.to_document(), next.to_document(), diff))
    };
    let (before_doc, after_doc, diff) = run()?;
    let before = traction_isolation::scheduler::WeeklyPlan::parse(&before_doc).map_err(|e| e.to_string())?;
    let after = traction_isolation::scheduler::WeeklyPlan::parse(&after_doc).map_err(|e| e.to_string())?;

    // Every job assigned before the sick call, and demand exactly equal to supply.
    let fri = Night::new("fri");
    let report = traction_isolation::scheduler::effective_capacity(&cal, &fri, &jobs);
    ensure(report.binding.len() == 5, || format!("binding crafts {:?}, expected all five", report.binding))?;
    ensure(before.assignments.values().all(|a| !a.is_cancelled()), || format!("initial plan cancels work:\n{before_doc}"))?;

    // The lowest-priority job that needs a lineman.
    let victim = jobs
        .by_priority()
        .into_iter()
        .filter(|j| j.variants[0].demand.0[0] > 0)
        .last()
        .map(|j| j.id.clone())
        .ok_or("no lineman job")?;
    for (key, a) in &after.assignments {
        let b = &before.assignments[key];
        if key.1 == victim {
            ensure(a.is_cancelled(), || format!("{} not cancelled: {a}", key.1))?;
        } else {
            ensure(a == b, || format!("{} changed {b} -> {a}", key.1))?;
        }
    }
    ensure(diff.len() == 1, || format!("diff {diff:?}"))?;
    for _ in 0..99 {
        ensure(run()? == (before_doc.clone(), after_doc.clone(), diff.clone()), || "nondeterministic".into())?;
    }
    Ok(format!("{} ; identical across 100 runs", diff[0]))
}

// ---------------------------------------------------------------------------
// 3. Four-track structural check

pub fn four_track_structure() -> Outcome {
    let topo = fixture_topology("fourtrack/fourtrack.net");
    let state = SwitchingState::normal(&topo);
    let req = &parse_requests(&fixture("fourtrack/bridle_removal.req")).map_err(|e| e.to_string())?[0];
    let plan = plan_isolation(&topo, &state, req).map_err(|e| e.to_string())?;
    let groups: BTreeSet<&str> = plan.forms.iter().map(|f| f.line_group.as_str()).collect();
    let expected: BTreeSet<&str> = ["1", "2", "3", "4", "FN", "FS"].into();
    ensure(plan.forms.len() == 6 && groups == expected, || format!("forms for {groups:?}"))?;
    let (iso, restore) = (plan.isolation_sequence().len(), plan.restore_sequence().len());
    ensure(iso == restore && plan.predicted_counts == (iso, restore), || format!("{iso} isolation vs {restore} restore ops"))?;
    ensure((60..=100).contains(&iso), || format!("{iso} isolation ops outside the 60-100 scale band"))?;
    ensure(plan.exact, || "final dead set is not exactly the target".into())?;
    round_trip(&topo, &state, &plan)?;
    Ok(format!(
        "6 forms ({}), {iso} isolation = {restore} restore ops, prefix-safe, 0 GROUND_FAULT/PHASE_TIE",
        groups.into_iter().collect::<Vec<_>>().join(",")
    ))
}

// ---------------------------------------------------------------------------
// 4. Energization oracle equivalence

pub const ENERGIZATION_TOPOLOGIES: usize = 1000;
pub const STATES_PER_TOPOLOGY: usize = 3;

pub fn energization_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut rng = gen::rng(0xE4E5);
    let mut frozen = String::new();
    let mut mismatches = Vec::new();
    for case in 0..ENERGIZATION_TOPOLOGIES {
        let spec = gen::energization_net(&mut rng, 20);
        let topo = spec.build();
        for k in 0..STATES_PER_TOPOLOGY {
            let state = gen::random_state(&mut rng, &spec, &topo);
            let want = oracle::energization(&spec, &state, 2.0);
            let _ = writeln!(frozen, "{case}.{k} {}", want.digest());
            if let Err(e) = compare_energization(&topo, &state, &want) {
                mismatches.push(format!("case {case}.{k}: {e}"));
            }
        }
    }
    let elapsed = t0.elapsed();
    golden::check("energization_oracle", &frozen)?;
    ensure(mismatches.is_empty(), || format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]))?;
    ensure(elapsed.as_secs_f64() < 10.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} topologies x {STATES_PER_TOPOLOGY} states, 0 mismatches, {:.2} s",
        ENERGIZATION_TOPOLOGIES,
        elapsed.as_secs_f64()
    ))
}

pub fn compare_energization(topo: &NetworkTopology, state: &SwitchingState, want: &oracle::Energization) -> Result<(), String> {
    let got = compute_energization(topo, state).map_err(|e| e.to_string())?;
    let names = |s: &BTreeSet<NodeId>| s.iter().map(|n| n.to_string()).collect::<BTreeSet<String>>();
    ensure(names(&got.energized) == want.energized, || format!("energized {:?} vs {:?}", got.energized, want.energized))?;
    ensure(names(&got.grounded) == want.grounded, || format!("grounded {:?} vs {:?}", got.grounded, want.grounded))?;
    ensure(names(&got.dead) == want.dead, || format!("dead {:?} vs {:?}", got.dead, want.dead))?;
    let of = |k: ViolationKind| got.violations.iter().filter(move |v| v.kind == k);
    let mut fault_nodes = Vec::new();
    for v in of(ViolationKind::GroundFault) {
        fault_nodes.extend(v.participants.iter().cloned());
    }
    let fault_set: BTreeSet<String> = fault_nodes.iter().cloned().collect();
    ensure(fault_nodes.len() == fault_set.len() && fault_set == want.fault_nodes, || {
        format!("ground-fault nodes {fault_nodes:?} vs {:?}", want.fault_nodes)
    })?;
    let tie: BTreeSet<String> = of(ViolationKind::PhaseTie).flat_map(|v| v.participants.iter().cloned()).collect();
    ensure(tie == want.phase_tie_sources, || format!("phase-tie sources {tie:?} vs {:?}", want.phase_tie_sources))?;
    let backfeed: BTreeSet<(String, String)> =
        of(ViolationKind::BackfeedHazard).map(|v| (v.participants[0].clone(), v.participants[1].clone())).collect();
    ensure(backfeed == want.backfeed, || format!("backfeed {backfeed:?} vs {:?}", want.backfeed))?;
    let scores: BTreeMap<String, f64> = got.source_scores.iter().map(|(s, v)| (s.to_string(), *v)).collect();
    ensure(
        scores.len() == want.scores.len() && scores.iter().all(|(s, v)| (v - want.scores[s]).abs() < 1e-9),
        || format!("scores {scores:?} vs {:?}", want.scores),
    )?;
    ensure(got.has(ViolationKind::Unbalance) == want.unbalanced, || format!("unbalance flag {}", want.unbalanced))
}

// ---------------------------------------------------------------------------
// 5. Isolation exhaustive oracle

pub const ISOLATION_CASES: usize = 300;

pub fn isolation_exhaustive() -> Outcome {
    let mut rng = gen::rng(0x150);
    let mut frozen = String::new();
    let mut mismatches = Vec::new();
    let (mut requests, mut exact) = (0, 0);
    let mut case = 0;
    while case < ISOLATION_CASES {
        let (spec, closed) = gen::isolation_case(&mut rng, 6);
        let topo = spec.build();
        let state = gen::state_with_positions(&spec, &topo, &closed);
        let in_service: BTreeSet<String> = state.sources_in_service.iter().map(|s| s.to_string()).collect();
        if !oracle::energization(&spec, &state, 2.0).phase_tie_sources.is_empty() {
            continue; // planning requires a violation-free starting state
        }
        for (k, (sid, _, _)) in spec.sections.iter().enumerate() {
            requests += 1;
            let req = IsolationRequest::new(format!("R{case}_{k}"), [sid.as_str()]);
            let planned = plan_isolation(&topo, &state, &req);
            let bound = match &planned {
                Ok(p) => p.isolation_sequence().iter().filter(|o| matches!(o.kind, OpKind::Open | OpKind::Close)).count(),
                Err(_) => 2 * spec.devices.len(),
            };
            let hit = oracle::exact_isolation_search(&spec, &closed, &in_service, k, bound);
            let _ = writeln!(
                frozen,
                "{case} {sid}: {}",
                match &hit {
                    Some(h) => format!("depth={} E={}", h.depth, h.energized.iter().cloned().collect::<Vec<_>>().join(",")),
                    None => "none".into(),
                }
            );
            let verdict = match (&planned, &hit) {
                (Ok(plan), _) => match execute_checked(&topo, &state, &plan.isolation_sequence(), "PD1") {
                    Err(e) => Err(format!("plan does not execute safely: {e}")),
                    Ok(fin) => {
                        let e = compute_energization(&topo, &fin).map_err(|e| e.to_string())?;
                        let energized: BTreeSet<String> = e.energized.iter().map(|n| n.to_string()).collect();
                        match hit {
                            Some(h) if plan.exact && energized == h.energized => {
                                exact += 1;
                                Ok(())
                            }
                            Some(h) => Err(format!("oracle isolates exactly at depth {}, plan exact={} E={energized:?}", h.depth, plan.exact)),
                            None if plan.exact => Err(format!("plan is exact but the search finds nothing within {bound} ops")),
                            None => Ok(()),
                        }
                    }
                },
                (Err(e), Some(h)) => Err(format!("planner fails ({}) but the search isolates at depth {}", e.code(), h.depth)),
                (Err(_), None) => Ok(()),
            };
            if let Err(e) = verdict {
                mismatches.push(format!("case {case} section {sid}: {e}\n{spec:?}\nclosed={closed:?}"));
            }
        }
        case += 1;
    }
    golden::check("isolation_search", &frozen)?;
    ensure(mismatches.is_empty(), || format!("{} mismatches of {requests}; first: {}", mismatches.len(), mismatches[0]))?;
    Ok(format!("{ISOLATION_CASES} topologies (<= 6 devices), {requests} single-section requests, {exact} exact isolations, 0 mismatches"))
}

// ---------------------------------------------------------------------------
// 6. Constraint enforcement

pub fn constraint_enforcement() -> Outcome {
    // Span limit on the paper-scale network: every run of consecutive
    // trolley sections on one track.
    let topo = fixture_topology("fourtrack/fourtrack.net");
    let state = SwitchingState::normal(&topo);
    let mut rng = gen::rng(0x5A);
    let (mut rejected, mut accepted) = (0, 0);
    for _ in 0..60 {
        let track = rng.gen_range(1..=4);
        let span = rng.gen_range(0..22);
        let count = rng.gen_range(1..=4);
        let ids: Vec<String> = (0..count)
            .map(|i| {
                let k = span + (i / 3);
                format!("T{track}-{k}{}", ["a", "b", "c"][i % 3])
            })
            .collect();
        let secs: Vec<_> = ids.iter().map(|s| topo.section(s).unwrap()).collect();
        let hull = secs.iter().map(|s| s.end_ft).max().unwrap() - secs.iter().map(|s| s.start_ft).min().unwrap();
        let req = IsolationRequest::new("span", ids.iter().map(String::as_str));
        match plan_isolation(&topo, &state, &req) {
            Err(PlanError::SpanExceeded { span_ft, suggestion, .. }) => {
                ensure(hull > MAX_WORK_ZONE_FT && span_ft == hull, || format!("{ids:?}: SPAN_EXCEEDED for hull {hull}"))?;
                ensure(suggestion.iter().all(|p| p.span_ft() <= MAX_WORK_ZONE_FT), || format!("{ids:?}: split {suggestion:?}"))?;
                let covered: BTreeSet<String> = suggestion.iter().flat_map(|p| p.sections.iter().map(|s| s.to_string())).collect();
                ensure(covered == ids.iter().cloned().collect(), || format!("{ids:?}: split covers {covered:?}"))?;
                rejected += 1;
            }
            Err(e) if hull > MAX_WORK_ZONE_FT => return Err(format!("{ids:?} spans {hull} ft but fails with {}", e.code())),
            Ok(_) | Err(_) if hull > MAX_WORK_ZONE_FT => return Err(format!("{ids:?} spans {hull} ft and was accepted")),
            _ => accepted += 1,
        }
    }

    // Wire runs: a 12,000 ft unterminated chain, random chains, and the fixture.
    let mut b = TopologyBuilder::new();
    b.zone("Z").track("1");
    for (i, n) in ["a", "b", "c", "d"].iter().enumerate() {
        b.node(*n, "Z", i as i64 * 4000);
    }
    b.trolley("w1", "1", "a", "b", 0, 4000).trolley("w2", "1", "b", "c", 4000, 8000).trolley("w3", "1", "c", "d", 8000, 12000);
    let chain = b.build().map_err(|e| format!("{e:?}"))?;
    let runs = wire_run_check(&chain);
    ensure(runs.len() == 1 && runs[0].sections.len() == 3 && runs[0].length_ft == 12_000, || format!("chain runs {runs:?}"))?;
    wire_runs_match_oracle(&fixture("fourtrack/fourtrack.net"))?;
    ensure(wire_run_check(&topo).is_empty(), || "fourtrack has over-long wire runs".into())?;
    let mut frozen = String::new();
    for case in 0..200 {
        let doc = random_chain_document(&mut rng);
        let long = wire_runs_match_oracle(&doc)?;
        let _ = writeln!(frozen, "{case}: {}", long.iter().map(|r| r.join("+")).collect::<Vec<_>>().join(" "));
    }
    golden::check("wire_runs", &frozen)?;
    Ok(format!(
        "{rejected} over-long requests rejected with SPAN_EXCEEDED and <= {MAX_WORK_ZONE_FT} ft splits, {accepted} within limit; 12,000 ft chain reported; wire runs match path enumeration"
    ))
}

/// Engine wire-run report equals exhaustive path enumeration on `doc`.
pub fn wire_runs_match_oracle(doc: &str) -> Result<BTreeSet<Vec<String>>, String> {
    let topo = load_topology(doc).map_err(|e| e.to_string())?;
    let got: BTreeSet<Vec<String>> =
        wire_run_check(&topo).into_iter().map(|r| r.sections.iter().map(|s| s.to_string()).collect()).collect();
    let want = oracle::long_wire_paths(&oracle::trolley_sections(doc), MAX_WIRE_RUN_FT);
    ensure(got == want, || format!("wire runs {got:?} vs path enumeration {want:?}"))?;
    Ok(want)
}

/// Up to three tracks of consecutive sections; each joint is either a shared
/// node or an insulated break.
pub fn random_chain_document(rng: &mut rand_chacha::ChaCha8Rng) -> String {
    let mut doc = String::from("zone Z\n");
    for t in 1..=rng.gen_range(1..=3) {
        let _ = writeln!(doc, "track {t}");
        let mut at = 0i64;
        let mut node = format!("t{t}n0");
        let _ = writeln!(doc, "node {node} Z 0");
        for k in 0..rng.gen_range(1..=6) {
            let len = rng.gen_range(1..=8) * 1000;
            let end = format!("t{t}n{}", k + 1);
            let _ = writeln!(doc, "node {end} Z {}", at + len);
            let _ = writeln!(doc, "section t{t}s{k} trolley track={t} {node} {end} {at} {}", at + len);
            at += len;
            node = if rng.gen_bool(0.3) {
                let gap = format!("t{t}g{k}");
                let _ = writeln!(doc, "node {gap} Z {at}");
                gap
            } else {
                end
            };
        }
    }
    doc
}

// ---------------------------------------------------------------------------
// 7. Plate-order protocol

pub const POPS_EVENTS: usize = 10_000;
pub const PLATE_REQUESTS: usize = 50;

pub fn plate_order_protocol() -> Outcome {
    let net = fixture("fourtrack/fourtrack.net");
    let topo = load_topology(&net).map_err(|e| e.to_string())?;
    let library = topo.plate_library();
    ensure(library.len() == 200, || format!("library has {} orders", library.len()))?;

    // POPS fuzz against the reference table.
    let mut rng = gen::rng(0x9095);
    let ids: Vec<String> = library.iter().map(|o| o.id.to_string()).collect();
    let mut session = PopsSession::new(PlateOrderId::new(ids[0].as_str()), PersonId::new("PD1"), PersonId::new("TD1"));
    let mut visited = BTreeSet::new();
    let mut frozen = String::new();
    for step in 0..POPS_EVENTS {
        let event = *PopsEvent::ALL.choose(&mut rng).unwrap();
        let before = session.state;
        let want = oracle::pops_table(before, event);
        let got = session.apply(event, step as u64);
        match want {
            Some(s) => ensure(got.is_ok() && session.state == s, || format!("step {step}: {before} + {event} -> {:?}", session.state))?,
            None => ensure(got.is_err() && session.state == before, || format!("step {step}: illegal {before} + {event} accepted"))?,
        }
        ensure(PopsState::ALL.contains(&session.state), || "left the declared state set".into())?;
        let locked = session.locked_switches(library);
        let in_effect = session.state == PopsState::InEffect;
        ensure(session.locks_active() == in_effect, || format!("lock flag wrong in {}", session.state))?;
        let blocked = &library.get(session.plate_order.as_str()).unwrap().blocked_switches;
        ensure(if in_effect { locked == *blocked } else { locked.is_empty() }, || format!("locks {locked:?} in {}", session.state))?;
        visited.insert(session.state);
        if session.state == PopsState::Released && rng.gen_bool(0.5) {
            // a new plate order for the next round
            session = PopsSession::new(PlateOrderId::new(ids.choose(&mut rng).unwrap().as_str()), session.director, session.dispatcher);
        }
    }
    ensure(visited.len() == 6, || format!("fuzz visited only {visited:?}"))?;
    for s in PopsState::ALL {
        for e in PopsEvent::ALL {
            let _ = writeln!(frozen, "{s} {e} -> {}", oracle::pops_table(s, e).map_or("ILLEGAL".to_string(), |t| t.to_string()));
        }
    }
    golden::check("pops_table", &frozen)?;

    // Selection against a full scan.
    let doc = oracle::plate_doc(&net);
    let mut frozen = String::new();
    let (mut covered, mut uncovered) = (0, 0);
    for i in 0..PLATE_REQUESTS {
        let (targets, margin) = random_plate_request(&mut rng);
        let req = IsolationRequest::new(format!("Q{i}"), targets.iter().map(String::as_str));
        let got = select_plate_order(library, &topo, &req, margin).ok().map(|o| o.id.to_string());
        let want = oracle::best_plate(&doc, &targets, margin);
        let _ = writeln!(frozen, "{} margin={margin} -> {}", targets.join(","), want.as_deref().unwrap_or("NO_PLATE_ORDER"));
        ensure(got == want, || format!("{targets:?} margin {margin}: selected {got:?}, full scan {want:?}"))?;
        if want.is_some() {
            covered += 1;
        } else {
            uncovered += 1;
        }
    }
    golden::check("plate_scan", &frozen)?;
    Ok(format!(
        "{POPS_EVENTS} fuzzed events stay in the 6 states, locks iff in_effect; {PLATE_REQUESTS} requests ({covered} covered, {uncovered} NO_PLATE_ORDER) match the 200-order full scan"
    ))
}

/// Trolley sections near one another on the four-track fixture, plus a margin.
pub fn random_plate_request(rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<String>, i64) {
    let span = rng.gen_range(0..23);
    let tracks: Vec<u32> = match rng.gen_range(0..4) {
        0 => vec![rng.gen_range(1..=4)],
        1 => vec![1, 2],
        2 => vec![3, 4],
        _ => vec![1, 3],
    };
    let mut targets = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=3) {
        let t = tracks.choose(rng).unwrap();
        let k = (span + rng.gen_range(0..3)).min(22);
        targets.insert(format!("T{t}-{k}{}", ["a", "b", "c"][rng.gen_range(0..3)]));
    }
    let margin = *[0, 0, 100, 2000, 20_000].choose(rng).unwrap();
    (targets.into_iter().collect(), margin)
}

// ---------------------------------------------------------------------------
// 8. Round-trip restoration

pub const ROUND_TRIP_CASES: usize = 500;

pub fn round_trip_restoration() -> Outcome {
    let mut fixtures = 0;
    for (net, reqs) in [
        ("minimal/minimal.net", vec!["minimal/minimal.req"]),
        ("fourtrack/fourtrack.net", vec!["fourtrack/bridle_removal.req", "fourtrack/overlap.req"]),
    ] {
        let topo = fixture_topology(net);
        let state = SwitchingState::normal(&topo);
        for r in reqs {
            for req in parse_requests(&fixture(r)).map_err(|e| e.to_string())? {
                let plan = plan_isolation(&topo, &state, &req).map_err(|e| format!("{r}: {e}"))?;
                round_trip(&topo, &state, &plan).map_err(|e| format!("{r}: {e}"))?;
                fixtures += 1;
            }
        }
    }
    let mut rng = gen::rng(0x7777);
    let (mut done, mut tried) = (0, 0);
    while done < ROUND_TRIP_CASES {
        tried += 1;
        ensure(tried < 20 * ROUND_TRIP_CASES, || format!("only {done} plannable cases in {tried}"))?;
        let (spec, closed) = gen::isolation_case(&mut rng, 6);
        let topo = spec.build();
        let state = gen::state_with_positions(&spec, &topo, &closed);
        let k = rng.gen_range(0..spec.sections.len());
        let req = IsolationRequest::new("RT", [spec.sections[k].0.as_str()]);
        let Ok(plan) = plan_isolation(&topo, &state, &req) else { continue };
        round_trip(&topo, &state, &plan).map_err(|e| format!("random case {tried}: {e}\n{spec:?} closed={closed:?}"))?;
        done += 1;
    }
    Ok(format!("{fixtures} fixture plans and {done} random small cases restore positions, grounds and tags exactly"))
}

// ---------------------------------------------------------------------------
// 9. Scheduler oracle

pub const SCHEDULE_INSTANCES: usize = 2000;

pub fn minimal_context_parts() -> (NetworkTopology, SwitchingState, Vec<IsolationRequest>) {
    let topo = fixture_topology("minimal/minimal.net");
    let state = SwitchingState::normal(&topo);
    let requests = vec![IsolationRequest::new("R1", ["t"]), IsolationRequest::new("R2", ["no_such_section"])];
    (topo, state, requests)
}

pub fn scheduler_exhaustive() -> Outcome {
    let (topo, state, requests) = minimal_context_parts();
    let ctx = PlanningContext::new(&topo, &state, &requests);
    let mut rng = gen::rng(0x5C4E);
    let mut frozen = String::new();
    let mut assigned = 0;
    for case in 0..SCHEDULE_INSTANCES {
        let (jobs_doc, cal_doc) = gen::schedule_instance(&mut rng, 4, 3);
        let jobs = parse_jobs(&jobs_doc).map_err(|e| e.to_string())?;
        let cal = parse_calendar(&cal_doc).map_err(|e| e.to_string())?;
        let plan = build_weekly_plan(&jobs, &cal, Some(&ctx)).map_err(|e| e.to_string())?;
        ensure(plan.feasibility_violations().is_empty(), || format!("case {case}: {:?}", plan.feasibility_violations()))?;
        let mut line = format!("{case}:");
        for night in ["mon", "tue"] {
            let mut inputs = oracle::NightInputs::from_calendar(&cal, night);
            inputs.blocked_isolations.insert("R2".into());
            let on = oracle::jobs_on(&jobs, night);
            let best = oracle::exhaustive_night(&inputs, &jobs, &on);
            for (&j, choice) in on.iter().zip(&best) {
                let job = &jobs.jobs[j];
                let want = choice.map(|v| job.variants[v].label.to_string()).unwrap_or_else(|| "X".into());
                let _ = write!(line, " {night}/{}={want}", job.id);
                let got = match plan.assignment(night, job.id.as_str()) {
                    Some(Assignment::Assigned(l)) => l.to_string(),
                    Some(Assignment::Cancelled(_)) => "X".into(),
                    None => "missing".into(),
                };
                if want != "X" {
                    assigned += 1;
                }
                ensure(got == want, || format!("case {case} {night} {}: greedy {got}, optimum {want}\n{jobs_doc}{cal_doc}", job.id))?;
            }
        }
        frozen.push_str(&line);
        frozen.push('\n');
    }
    golden::check("scheduler_exhaustive", &frozen)?;
    Ok(format!("{SCHEDULE_INSTANCES} instances (<= 4 jobs x <= 3 variants, 2 nights), greedy = exhaustive optimum, {assigned} assignments"))
}

/// Silence unused-import warnings in test files that use only some checks.
pub fn _unused(_: &NetSpec) {}
