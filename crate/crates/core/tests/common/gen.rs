//! Seeded random networks and states.
//!
//! A [`NetSpec`] is plain data: index-based nodes, sections, devices,
//! sources and grounds. It builds into a [`NetworkTopology`] for the engine,
//! while the oracles read the spec directly.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traction_isolation::ids::*;
use traction_isolation::state::{Position, SwitchingState};
use traction_isolation::topology::{DeviceKind, GroundKind, NetworkTopology, SourceKind, TopologyBuilder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Default)]
pub struct NetSpec {
    pub zones: Vec<String>,
    /// (id, zone index)
    pub nodes: Vec<(String, usize)>,
    /// (id, node, node); every section is a 100 ft trolley section on its own track.
    pub sections: Vec<(String, usize, usize)>,
    pub devices: Vec<(String, DeviceKind, usize, usize)>,
    pub sources: Vec<(String, usize)>,
    pub grounds: Vec<(String, usize)>,
    /// Sections that are not trolley wire (document-derived specs only).
    pub non_trolley: std::collections::BTreeSet<String>,
    /// Devices whose document sets `loadbreak=1` explicitly.
    pub load_break_override: std::collections::BTreeSet<String>,
}

impl NetSpec {
    pub fn build(&self) -> NetworkTopology {
        let mut b = TopologyBuilder::new();
        for z in &self.zones {
            b.zone(z.as_str());
        }
        for (i, (id, z)) in self.nodes.iter().enumerate() {
            b.node(id.as_str(), self.zones[*z].as_str(), i as i64 * 100);
        }
        for (k, (id, a, c)) in self.sections.iter().enumerate() {
            let track = format!("L{k}");
            b.track(track.as_str());
            b.trolley(id.as_str(), track, self.nodes[*a].0.as_str(), self.nodes[*c].0.as_str(), 0, 100);
        }
        for (id, kind, a, c) in &self.devices {
            b.simple_device(id.as_str(), *kind, self.nodes[*a].0.as_str(), self.nodes[*c].0.as_str());
        }
        for (id, n) in &self.sources {
            b.source(id.as_str(), SourceKind::SupplySubstation, self.nodes[*n].0.as_str());
        }
        for (id, n) in &self.grounds {
            b.ground(id.as_str(), GroundKind::Box, self.nodes[*n].0.as_str());
        }
        match b.build() {
            Ok(t) => t,
            Err(issues) => panic!("generated network is invalid: {issues:?}\n{self:?}"),
        }
    }

    pub fn zone_of_node(&self, n: usize) -> usize {
        self.nodes[n].1
    }

    pub fn node_index(&self, id: &str) -> usize {
        self.nodes.iter().position(|(n, _)| n == id).unwrap_or_else(|| panic!("unknown node {id}"))
    }
}

fn pick_pair(rng: &mut ChaCha8Rng, spec: &NetSpec, same_zone: bool) -> Option<(usize, usize)> {
    let n = spec.nodes.len();
    for _ in 0..20 {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && (!same_zone || spec.nodes[a].1 == spec.nodes[b].1) {
            return Some((a, b));
        }
    }
    None
}

fn random_kind(rng: &mut ChaCha8Rng) -> DeviceKind {
    *[DeviceKind::Breaker, DeviceKind::Mod, DeviceKind::KnifeSwitch, DeviceKind::Tie].choose(rng).unwrap()
}

fn nodes_and_zones(rng: &mut ChaCha8Rng, n: usize) -> NetSpec {
    let zones = if rng.gen_bool(0.5) { 1 } else { 2 };
    NetSpec {
        zones: (0..zones).map(|z| format!("Z{z}")).collect(),
        nodes: (0..n).map(|i| (format!("n{i}"), rng.gen_range(0..zones))).collect(),
        ..NetSpec::default()
    }
}

/// A network of up to `max_nodes` nodes with random sections, devices,
/// one to three sources and up to three ground points.
pub fn energization_net(rng: &mut ChaCha8Rng, max_nodes: usize) -> NetSpec {
    let n = rng.gen_range(2..=max_nodes);
    let mut spec = nodes_and_zones(rng, n);
    for k in 0..rng.gen_range(0..=n) {
        if let Some((a, b)) = pick_pair(rng, &spec, true) {
            spec.sections.push((format!("s{k}"), a, b));
        }
    }
    for k in 0..rng.gen_range(0..=n) {
        if let Some((a, b)) = pick_pair(rng, &spec, false) {
            let kind = if spec.nodes[a].1 != spec.nodes[b].1 { DeviceKind::Tie } else { random_kind(rng) };
            spec.devices.push((format!("d{k}"), kind, a, b));
        }
    }
    for k in 0..rng.gen_range(1..=3) {
        spec.sources.push((format!("S{k}"), rng.gen_range(0..n)));
    }
    for k in 0..rng.gen_range(0..=3) {
        spec.grounds.push((format!("G{k}"), rng.gen_range(0..n)));
    }
    spec
}

/// A random switching state: device positions, sources in service, applied
/// grounds and train bridges.
pub fn random_state(rng: &mut ChaCha8Rng, spec: &NetSpec, topo: &NetworkTopology) -> SwitchingState {
    let mut s = SwitchingState::normal(topo);
    for (id, _, _, _) in &spec.devices {
        let p = if rng.gen_bool(0.5) { Position::Closed } else { Position::Open };
        s.set_position(DeviceId::new(id.as_str()), p);
    }
    s.sources_in_service.retain(|_| rng.gen_bool(0.8));
    for (id, _) in &spec.grounds {
        if rng.gen_bool(0.3) {
            s.applied_grounds.insert(GroundId::new(id.as_str()));
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        if let Some((a, b)) = pick_pair(rng, spec, false) {
            s.pantograph_bridges.insert((NodeId::new(spec.nodes[a].0.as_str()), NodeId::new(spec.nodes[b].0.as_str())));
        }
    }
    s
}

/// A small network for isolation planning: up to `max_devices` devices, a
/// box ground at every node, one or two sources (one per zone), no trains
/// and no tags. Device positions are random.
pub fn isolation_case(rng: &mut ChaCha8Rng, max_devices: usize) -> (NetSpec, Vec<bool>) {
    let n = rng.gen_range(3..=8);
    let mut spec = nodes_and_zones(rng, n);
    for k in 0..rng.gen_range(1..=n) {
        if let Some((a, b)) = pick_pair(rng, &spec, true) {
            spec.sections.push((format!("s{k}"), a, b));
        }
    }
    if spec.sections.is_empty() {
        spec.zones.truncate(1);
        for node in &mut spec.nodes {
            node.1 = 0;
        }
        spec.sections.push(("s0".into(), 0, 1));
    }
    for k in 0..rng.gen_range(1..=max_devices) {
        if let Some((a, b)) = pick_pair(rng, &spec, false) {
            let kind = if spec.nodes[a].1 != spec.nodes[b].1 { DeviceKind::Tie } else { random_kind(rng) };
            spec.devices.push((format!("d{k}"), kind, a, b));
        }
    }
    for z in 0..spec.zones.len() {
        let members: Vec<usize> = (0..n).filter(|&i| spec.nodes[i].1 == z).collect();
        if let Some(&node) = members.choose(rng) {
            spec.sources.push((format!("S{z}"), node));
        }
    }
    for i in 0..n {
        spec.grounds.push((format!("G{i}"), i));
    }
    let closed = spec.devices.iter().map(|_| rng.gen_bool(0.7)).collect();
    (spec, closed)
}

pub fn state_with_positions(spec: &NetSpec, topo: &NetworkTopology, closed: &[bool]) -> SwitchingState {
    let mut s = SwitchingState::normal(topo);
    for ((id, _, _, _), &c) in spec.devices.iter().zip(closed) {
        s.set_position(DeviceId::new(id.as_str()), if c { Position::Closed } else { Position::Open });
    }
    s
}

/// A random weekly scheduling instance as (jobs document, calendar document):
/// up to `max_jobs` jobs with up to `max_variants` variants each over the
/// nights `mon` and `tue`. Variants may need isolation `R1` (plannable on
/// the minimal fixture) or `R2` (never plannable), a track outage, or a
/// contractor crew.
pub fn schedule_instance(rng: &mut ChaCha8Rng, max_jobs: usize, max_variants: usize) -> (String, String) {
    use std::fmt::Write;
    const CRAFTS: [&str; 5] = ["lineman", "groundman", "director", "flagman", "dispatcher"];
    let nights = ["mon", "tue"];
    let mut jobs = String::new();
    let n_jobs = rng.gen_range(1..=max_jobs);
    let mut prios: Vec<u32> = (1..=n_jobs as u32).collect();
    prios.shuffle(rng);
    for (j, prio) in prios.iter().enumerate() {
        let on: Vec<&str> = match rng.gen_range(0..3) {
            0 => vec!["mon"],
            1 => vec!["tue"],
            _ => nights.to_vec(),
        };
        let owner = if rng.gen_bool(0.4) { "contractor" } else { "in_house" };
        let _ = writeln!(jobs, "job J{} prio={prio} owner={owner} nights={}", j + 1, on.join(","));
        for label in ["A", "B", "C"].iter().take(rng.gen_range(1..=max_variants)) {
            let _ = write!(jobs, "variant {label}");
            for c in CRAFTS {
                let _ = write!(jobs, " {c}={}", rng.gen_range(0..=3));
            }
            match rng.gen_range(0..6) {
                0 => jobs.push_str(" isolation=R1"),
                1 => jobs.push_str(" isolation=R2"),
                _ => {}
            }
            if rng.gen_bool(0.3) {
                jobs.push_str(" outage=1");
            }
            let _ = writeln!(jobs, " progress={}", rng.gen_range(1..=4));
        }
    }
    for req in ["R1", "R2"] {
        let _ = write!(jobs, "isolation {req}");
        for c in CRAFTS {
            let _ = write!(jobs, " {c}={}", rng.gen_range(0..=1));
        }
        jobs.push('\n');
    }
    let mut cal = String::new();
    for night in nights {
        for c in CRAFTS {
            let _ = writeln!(cal, "avail {night} {c} {}", rng.gen_range(0..=6));
        }
        if rng.gen_bool(0.5) {
            let _ = writeln!(cal, "crews {night} {}", rng.gen_range(0..=2));
        }
        if rng.gen_bool(0.5) {
            let _ = writeln!(cal, "outages {night} {}", rng.gen_range(0..=2));
        }
    }
    (jobs, cal)
}
