//! Plans an isolation request against a network and prints the switching
//! orders, one form per line group, followed by the restore forms.
//!
//! Run with
//! `cargo run -p traction-isolation --example isolate -- fixtures/fourtrack/fourtrack.net fixtures/fourtrack/bridle_removal.req`.

use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{parse_requests, plan_isolation};
use traction_isolation::topology::load_topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let net = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.net".into());
    let req = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.req".into());
    let topo = load_topology(&std::fs::read_to_string(net)?)?;
    let state = SwitchingState::normal(&topo);
    for request in parse_requests(&std::fs::read_to_string(req)?)? {
        let plan = plan_isolation(&topo, &state, &request)?;
        println!("{plan}");
        println!("{}", plan.summary());
        if std::env::var_os("SHOW_FORMS").is_some() {
            for f in plan.forms.iter().chain(&plan.restore_forms) {
                print!("{}", f.to_document());
            }
        }
    }
    Ok(())
}
