//! Plate orders: POPS protocol, selection, and coverage gaps against the
//! elementary-interval oracle.

mod common;

use rand::seq::SliceRandom;

use common::{checks, fixture, gen, oracle};
use traction_isolation::plate_orders::{coverage_check, select_plate_order, Coverage};
use traction_isolation::switching::IsolationRequest;
use traction_isolation::topology::load_topology;

#[test]
fn pops_protocol_and_selection() {
    checks::plate_order_protocol().unwrap();
}

fn engine_gaps(c: Coverage) -> Vec<(String, i64, i64)> {
    match c {
        Coverage::Covered => Vec::new(),
        Coverage::Gaps(g) => g.into_iter().map(|g| (g.section.to_string(), g.start_ft, g.end_ft)).collect(),
    }
}

/// Every (plate order, request) pair: the reported gaps are exactly the
/// oracle's uncovered stretches.
#[test]
fn coverage_gaps_match_the_oracle() {
    let net = fixture("fourtrack/fourtrack.net");
    let topo = load_topology(&net).unwrap();
    let doc = oracle::plate_doc(&net);
    let library = topo.plate_library();
    let orders: Vec<_> = library.iter().collect();
    let mut rng = gen::rng(0xC0F);
    let (mut covered, mut partial) = (0, 0);
    for i in 0..400 {
        let (targets, margin) = checks::random_plate_request(&mut rng);
        let req = IsolationRequest::new(format!("Q{i}"), targets.iter().map(String::as_str));
        let plate = orders.choose(&mut rng).unwrap();
        let got = engine_gaps(coverage_check(&topo, plate, &req, margin));
        let want = oracle::plate_gaps(&doc, plate.id.as_str(), &targets, margin);
        assert_eq!(got, want, "{} on {targets:?} margin {margin}", plate.id);
        if want.is_empty() {
            covered += 1;
        } else {
            partial += 1;
        }
    }
    assert!(covered > 0 && partial > 0, "{covered} covered, {partial} with gaps");
}

#[test]
fn minimal_fixture_by_hand() {
    let topo = load_topology(&fixture("minimal/minimal.net")).unwrap();
    let library = topo.plate_library();
    let t = IsolationRequest::new("R1", ["t"]);
    let both = IsolationRequest::new("R2", ["t", "u"]);
    // P1 bars exactly 0..4000 on track 1: covers t, not t plus 100 ft either side.
    assert!(coverage_check(&topo, library.get("P1").unwrap(), &t, 0).is_covered());
    assert_eq!(
        engine_gaps(coverage_check(&topo, library.get("P1").unwrap(), &t, 100)),
        vec![("t".to_string(), -100, 0), ("t".to_string(), 4000, 4100)]
    );
    // The smallest covering order wins; only P3 covers both sections.
    assert_eq!(select_plate_order(library, &topo, &t, 0).unwrap().id.as_str(), "P1");
    assert_eq!(select_plate_order(library, &topo, &both, 0).unwrap().id.as_str(), "P3");
    assert_eq!(select_plate_order(library, &topo, &both, 100).unwrap_err().code(), "NO_PLATE_ORDER");
}
