//! Selects the plate order protecting each isolation request and reports
//! whether it covers the work limits plus the safety margin.
//!
//! Run with
//! `cargo run -p traction-isolation --example plate_order -- fixtures/fourtrack/fourtrack.net fixtures/fourtrack/bridle_removal.req 200`.

use traction_isolation::plate_orders::{coverage_check, select_plate_order, Coverage};
use traction_isolation::switching::parse_requests;
use traction_isolation::topology::load_topology;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let net = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.net".into());
    let req = args.next().unwrap_or_else(|| "fixtures/minimal/minimal.req".into());
    let margin: i64 = args.next().map_or(Ok(0), |m| m.parse())?;
    let topo = load_topology(&std::fs::read_to_string(net)?)?;
    for request in parse_requests(&std::fs::read_to_string(req)?)? {
        match select_plate_order(topo.plate_library(), &topo, &request, margin) {
            Ok(order) => {
                println!("{}: plate order {} \"{}\"", request.id, order.id, order.description);
                match coverage_check(&topo, order, &request, margin) {
                    Coverage::Covered => println!("  covers the work limits with a {margin} ft margin"),
                    Coverage::Gaps(gaps) => gaps.iter().for_each(|g| println!("  gap {g}")),
                }
            }
            Err(e) => println!("{}: {} ({e})", request.id, e.code()),
        }
    }
    Ok(())
}
