//! Loads a network document, validates it, and reports its inventory and any
//! over-long wire runs.
//!
//! Run with `cargo run -p traction-isolation --example validate -- fixtures/fourtrack/fourtrack.net`.

use traction_isolation::energization::compute_energization;
use traction_isolation::state::SwitchingState;
use traction_isolation::topology::{load_topology, wire_run_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/minimal/minimal.net".into());
    let topo = load_topology(&std::fs::read_to_string(&path)?)?;
    println!("{}", topo.summary());
    let long = wire_run_check(&topo);
    println!("wire runs over two miles: {}", long.len());
    for r in &long {
        println!("  track {} {}..{} ({} ft)", r.track, r.start_ft, r.end_ft, r.length_ft);
    }
    let e = compute_energization(&topo, &SwitchingState::normal(&topo))?;
    println!("normal state: {} energized nodes, {} violations", e.energized.len(), e.violations.len());
    for v in &e.violations {
        println!("  {} {}", v.kind.code(), v.detail);
    }
    Ok(())
}
