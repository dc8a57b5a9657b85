//! Builds a weekly outage plan from a job book and resource calendar, then
//! approves it, applies a disruption and prints the resulting assignment changes.
//!
//! Run with
//! `cargo run -p traction-isolation --example schedule -- fixtures/fourtrack/fourtrack.jobs fixtures/fourtrack/fourtrack.cal "sick_call lineman fri 3"`.

use traction_isolation::scheduler::{apply_disruption, build_weekly_plan, parse_calendar, parse_jobs, Disruption, PipelineStage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let jobs = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.jobs".into());
    let cal = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.cal".into());
    let event = args.next().unwrap_or_else(|| "sick_call craft=lineman night=mon count=2".into());
    let jobs = parse_jobs(&std::fs::read_to_string(jobs)?)?;
    let cal = parse_calendar(&std::fs::read_to_string(cal)?)?;
    let mut plan = build_weekly_plan(&jobs, &cal, None)?;
    // Disruptions apply to an approved plan.
    plan.advance_to(PipelineStage::Approved)?;
    for (night, job, assignment) in plan.ordered_assignments() {
        println!("{night:<6} {:<8} prio {:>2}  {assignment}", job.id.to_string(), job.priority);
    }
    let event: Disruption = event.parse()?;
    let (_, diff) = apply_disruption(&plan, &event)?;
    println!("\n{event}: {} change(s)", diff.len());
    for d in &diff {
        println!("  {d}");
    }
    Ok(())
}
