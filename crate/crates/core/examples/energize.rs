//! Computes which conductors are energized, dead or grounded for a network
//! and state document, and lists any safety violations.
//!
//! Run with
//! `cargo run -p traction-isolation --example energize -- fixtures/fourtrack/fourtrack.net fixtures/fourtrack/fourtrack.state`.

use traction_isolation::energization::compute_energization;
use traction_isolation::state::SwitchingState;
use traction_isolation::topology::load_topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let net = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.net".into());
    let state = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.state".into());
    let topo = load_topology(&std::fs::read_to_string(net)?)?;
    let state = SwitchingState::from_document(&topo, &std::fs::read_to_string(state)?)?;
    let e = compute_energization(&topo, &state)?;
    let names = |s: &std::collections::BTreeSet<_>| s.iter().map(|n: &traction_isolation::ids::NodeId| n.as_str().to_owned()).collect::<Vec<_>>().join(" ");
    println!("energized ({}): {}", e.energized.len(), names(&e.energized));
    println!("dead      ({}): {}", e.dead.len(), names(&e.dead));
    println!("grounded  ({}): {}", e.grounded.len(), names(&e.grounded));
    for v in &e.violations {
        println!("violation {v}");
    }
    Ok(())
}
