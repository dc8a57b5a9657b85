//! Works the `minimal` fixture's isolation through a control room: the
//! director requests the plate order, the dispatcher puts it in effect, the
//! director steps every op, then restores and the dispatcher releases.
//!
//! Run with `cargo run -p traction-isolation --example control_room`.

use std::sync::Arc;

use traction_isolation::ids::PersonId;
use traction_isolation::plate_orders::{PopsEvent, Role};
use traction_isolation::room::{fold_events, ControlRoom};
use traction_isolation::state::SwitchingState;
use traction_isolation::switching::{parse_requests, PlanOptions};
use traction_isolation::topology::load_topology;

const NET: &str = include_str!("../../../fixtures/minimal/minimal.net");
const REQ: &str = include_str!("../../../fixtures/minimal/minimal.req");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let topo = Arc::new(load_topology(NET)?);
    let mut room = ControlRoom::new("main", topo.clone(), SwitchingState::normal(&topo))?;
    let request = &parse_requests(REQ)?[0];
    let (plan, iso) = room.plan_isolation(request, &PlanOptions::default())?;
    println!("{}", plan.summary());

    let pd = PersonId::new("PD1");
    let td = PersonId::new("TD1");
    let session = iso.pops.clone().expect("minimal plan selects a plate order");

    // Stepping before the plate order is in effect is refused.
    let err = room.step(iso.orders[0].as_str(), &pd).unwrap_err();
    println!("before POPS: {} ({err})", err.code());

    room.pops_event(&session, PopsEvent::Request, Role::Director, &pd)?;
    room.pops_event(&session, PopsEvent::Acknowledge, Role::Dispatcher, &td)?;
    room.pops_event(&session, PopsEvent::PutInEffect, Role::Dispatcher, &td)?;

    for op in plan.isolation_sequence() {
        let r = room.step(op.order_ref.as_str(), &pd)?;
        println!("  {:>3} {:<16} {:<4} -> {}", r.op.seq, r.op.kind.to_string(), r.op.target, r.result);
    }
    let e = room.energization();
    println!("target grounded: {:?}; violations: {}", e.grounded, e.violations.len());

    room.pops_event(&session, PopsEvent::RequestRelease, Role::Director, &pd)?;
    for op in plan.restore_sequence() {
        room.step(op.order_ref.as_str(), &pd)?;
    }
    room.pops_event(&session, PopsEvent::Release, Role::Dispatcher, &td)?;
    assert_eq!(room.state(), &SwitchingState::normal(&topo));

    let folded = fold_events(&topo, room.events())?;
    assert_eq!(&folded, room.state());
    println!("{} events; fold of the log equals the live state", room.last_seq());
    for e in room.events().iter().take(4) {
        println!("  {e}");
    }
    Ok(())
}
