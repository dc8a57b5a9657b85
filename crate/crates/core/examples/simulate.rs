//! Plans an isolation and simulates the night it is worked in: the expected
//! timeline, then several sampled nights and their work-window aggregate.
//!
//! Run with
//! `cargo run -p traction-isolation --example simulate -- fixtures/fourtrack/fourtrack.net fixtures/fourtrack/bridle_removal.req fixtures/fourtrack/fourtrack.window`.

use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{parse_requests, plan_isolation};
use traction_isolation::timeline::{parse_night_setup, simulate_night, work_window_report, DurationModel, SimMode};
use traction_isolation::topology::load_topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let net = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.net".into());
    let req = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.req".into());
    let window = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.window".into());
    let topo = load_topology(&std::fs::read_to_string(net)?)?;
    let request = parse_requests(&std::fs::read_to_string(req)?)?.remove(0);
    let plan = plan_isolation(&topo, &SwitchingState::normal(&topo), &request)?;
    let (window, model) = parse_night_setup(&std::fs::read_to_string(window)?)?;

    let expected = simulate_night(&topo, &plan, &window, &model, SimMode::Expected)?;
    println!("expected night\n{expected}\n");
    let nights = (0..5)
        .map(|k| {
            let model = DurationModel { seed: model.seed.wrapping_add(k), ..model.clone() };
            simulate_night(&topo, &plan, &window, &model, SimMode::Sampled)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(agg) = work_window_report(&nights) {
        println!("five sampled nights\n{agg}");
    }
    Ok(())
}
