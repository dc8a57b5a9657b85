//! Independent reference implementations. None of these call engine
//! algorithms; they read generator data, document text, or the engine's
//! plain data structures, and compute results the slow, obvious way.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use traction_isolation::ids::*;
use traction_isolation::plate_orders::{PopsEvent, PopsState};
use traction_isolation::scheduler::{Craft, JobBook, Owner, ResourceCalendar};
use traction_isolation::state::SwitchingState;
use traction_isolation::topology::DeviceKind;

use super::gen::NetSpec;

// ---------------------------------------------------------------------------
// Documents

/// One whitespace-separated document line: keyword, positional tokens and
/// `key=value` options. Quoted text is kept as a single token.
#[derive(Clone, Debug)]
pub struct Line {
    pub keyword: String,
    pub args: Vec<String>,
    pub opts: BTreeMap<String, String>,
}

pub fn lines(text: &str) -> Vec<Line> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let raw = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut cur = String::new();
        let mut quoted = false;
        for ch in raw.chars() {
            match ch {
                '"' => quoted = !quoted,
                c if c.is_whitespace() && !quoted => {
                    if !cur.is_empty() {
                        tokens.push(std::mem::take(&mut cur));
                    }
                }
                c => cur.push(c),
            }
        }
        if !cur.is_empty() {
            tokens.push(cur);
        }
        if tokens.is_empty() {
            continue;
        }
        let keyword = tokens.remove(0);
        let mut args = Vec::new();
        let mut opts = BTreeMap::new();
        for t in tokens {
            match t.split_once('=') {
                Some((k, v)) => {
                    opts.insert(k.to_owned(), v.to_owned());
                }
                None => args.push(t),
            }
        }
        out.push(Line { keyword, args, opts });
    }
    out
}

/// The electrical skeleton of a network document, as a [`NetSpec`].
pub fn net_spec_from_document(text: &str) -> NetSpec {
    let mut spec = NetSpec::default();
    let mut zone_ix: HashMap<String, usize> = HashMap::new();
    let mut node_ix: HashMap<String, usize> = HashMap::new();
    let ls = lines(text);
    for l in &ls {
        if l.keyword == "zone" {
            zone_ix.insert(l.args[0].clone(), spec.zones.len());
            spec.zones.push(l.args[0].clone());
        }
    }
    for l in &ls {
        if l.keyword == "node" {
            node_ix.insert(l.args[0].clone(), spec.nodes.len());
            spec.nodes.push((l.args[0].clone(), zone_ix[&l.args[1]]));
        }
    }
    for l in &ls {
        match l.keyword.as_str() {
            "section" => {
                spec.sections.push((l.args[0].clone(), node_ix[&l.args[2]], node_ix[&l.args[3]]));
                if l.args[1] != "trolley" {
                    spec.non_trolley.insert(l.args[0].clone());
                }
            }
            "device" => {
                let kind = match l.args[1].as_str() {
                    "breaker" => DeviceKind::Breaker,
                    "mod" => DeviceKind::Mod,
                    "tie" => DeviceKind::Tie,
                    _ => DeviceKind::KnifeSwitch,
                };
                spec.devices.push((l.args[0].clone(), kind, node_ix[&l.args[2]], node_ix[&l.args[3]]));
                if l.opts.get("loadbreak").is_some_and(|v| v == "1") {
                    spec.load_break_override.insert(l.args[0].clone());
                }
            }
            "source" => spec.sources.push((l.args[0].clone(), node_ix[&l.args[2]])),
            "ground" => spec.grounds.push((l.args[0].clone(), node_ix[&l.args[2]])),
            _ => {}
        }
    }
    spec
}

// ---------------------------------------------------------------------------
// Energization

/// Naive reachability: sweep every edge until nothing changes.
pub fn reach(n: usize, edges: &[(usize, usize)], seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut r = vec![false; n];
    for s in seeds {
        r[s] = true;
    }
    loop {
        let mut changed = false;
        for &(a, b) in edges {
            if r[a] != r[b] {
                r[a] = true;
                r[b] = true;
                changed = true;
            }
        }
        if !changed {
            return r;
        }
    }
}

/// Hop distances by repeated relaxation (Bellman-Ford with unit weights).
pub fn hops(n: usize, edges: &[(usize, usize)], from: usize) -> Vec<Option<u32>> {
    let mut d: Vec<Option<u32>> = vec![None; n];
    d[from] = Some(0);
    loop {
        let mut changed = false;
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if let Some(dx) = d[x] {
                    if d[y].is_none_or(|dy| dx + 1 < dy) {
                        d[y] = Some(dx + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Energization {
    pub energized: BTreeSet<String>,
    pub grounded: BTreeSet<String>,
    pub dead: BTreeSet<String>,
    /// Nodes both energized and grounded.
    pub fault_nodes: BTreeSet<String>,
    /// Sources electrically joined to a source of another phase zone.
    pub phase_tie_sources: BTreeSet<String>,
    /// Bridges joining live wire to dead wire (ignoring bridges themselves).
    pub backfeed: BTreeSet<(String, String)>,
    pub scores: BTreeMap<String, f64>,
    pub unbalanced: bool,
}

impl Energization {
    /// One line for the frozen results file.
    pub fn digest(&self) -> String {
        let scores: Vec<String> = self.scores.iter().map(|(s, v)| format!("{s}:{v:.2}")).collect();
        format!(
            "E={} G={} D={} fault={} tie={} backfeed={} scores={} unbalanced={}",
            join(&self.energized),
            join(&self.grounded),
            join(&self.dead),
            join(&self.fault_nodes),
            join(&self.phase_tie_sources),
            self.backfeed.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(","),
            scores.join(","),
            self.unbalanced as u8,
        )
    }
}

fn join(s: &BTreeSet<String>) -> String {
    s.iter().cloned().collect::<Vec<_>>().join(",")
}

impl NetSpec {
    fn closed_edges(&self, state: &SwitchingState) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self.sections.iter().map(|(_, a, b)| (*a, *b)).collect();
        for (id, _, a, b) in &self.devices {
            if state.position(&DeviceId::new(id.as_str())).is_closed() {
                edges.push((*a, *b));
            }
        }
        edges
    }

    fn index_of(&self) -> HashMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, (id, _))| (id.as_str(), i)).collect()
    }

    pub fn oracle_load_break(&self, device: usize) -> bool {
        let (id, kind, _, _) = &self.devices[device];
        *kind == DeviceKind::Breaker || self.load_break_override.contains(id)
    }
}

pub fn energization(spec: &NetSpec, state: &SwitchingState, unbalance_factor: f64) -> Energization {
    let n = spec.nodes.len();
    let ix = spec.index_of();
    let closed = spec.closed_edges(state);
    let bridges: Vec<(usize, usize)> =
        state.pantograph_bridges.iter().map(|(a, b)| (ix[a.as_str()], ix[b.as_str()])).collect();
    let mut all = closed.clone();
    all.extend(&bridges);

    let in_service: Vec<(&String, usize)> = spec
        .sources
        .iter()
        .filter(|(id, _)| state.sources_in_service.contains(&SourceId::new(id.as_str())))
        .map(|(id, n)| (id, *n))
        .collect();
    let grounds: Vec<usize> = spec
        .grounds
        .iter()
        .filter(|(id, _)| state.applied_grounds.contains(&GroundId::new(id.as_str())))
        .map(|(_, n)| *n)
        .collect();

    let live = reach(n, &all, in_service.iter().map(|(_, v)| *v));
    let earthed = reach(n, &all, grounds.iter().copied());
    let name = |i: usize| spec.nodes[i].0.clone();

    let mut out = Energization {
        energized: (0..n).filter(|&i| live[i]).map(name).collect(),
        grounded: (0..n).filter(|&i| earthed[i]).map(name).collect(),
        dead: (0..n).filter(|&i| !live[i] && !earthed[i]).map(name).collect(),
        fault_nodes: (0..n).filter(|&i| live[i] && earthed[i]).map(name).collect(),
        phase_tie_sources: BTreeSet::new(),
        backfeed: BTreeSet::new(),
        scores: BTreeMap::new(),
        unbalanced: false,
    };

    for (i, (s, sn)) in in_service.iter().enumerate() {
        let from_s = reach(n, &all, [*sn]);
        for (t, tn) in in_service.iter().skip(i + 1) {
            if spec.zone_of_node(*sn) != spec.zone_of_node(*tn) && from_s[*tn] {
                out.phase_tie_sources.insert((*s).clone());
                out.phase_tie_sources.insert((*t).clone());
            }
        }
    }

    let unbridged = reach(n, &closed, in_service.iter().map(|(_, v)| *v));
    for (na, nb) in &state.pantograph_bridges {
        if unbridged[ix[na.as_str()]] != unbridged[ix[nb.as_str()]] {
            out.backfeed.insert((na.to_string(), nb.to_string()));
        }
    }

    let dist: Vec<(&String, Vec<Option<u32>>)> = in_service.iter().map(|(s, v)| (*s, hops(n, &closed, *v))).collect();
    for (s, _) in &in_service {
        out.scores.insert((*s).clone(), 0.0);
    }
    for (id, a, b) in &spec.sections {
        if spec.non_trolley.contains(id) || !live[*a] {
            continue;
        }
        let per: Vec<(&String, Option<u32>)> = dist
            .iter()
            .map(|(s, d)| {
                let best = match (d[*a], d[*b]) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                (*s, best)
            })
            .collect();
        let Some(best) = per.iter().filter_map(|(_, d)| *d).min() else { continue };
        let winners: Vec<&String> = per.iter().filter(|(_, d)| *d == Some(best)).map(|(s, _)| *s).collect();
        for w in &winners {
            *out.scores.get_mut(*w).unwrap() += 1.0 / winners.len() as f64;
        }
    }
    if out.scores.len() >= 2 {
        let mean = out.scores.values().sum::<f64>() / out.scores.len() as f64;
        let max = out.scores.values().cloned().fold(f64::MIN, f64::max);
        out.unbalanced = max > unbalance_factor * mean;
    }
    out
}

// ---------------------------------------------------------------------------
// Isolation: bounded exhaustive sequence search

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchHit {
    /// Fewest position changes reaching an exact isolation.
    pub depth: usize,
    pub closed: Vec<bool>,
    /// Energized nodes in the reached configuration.
    pub energized: BTreeSet<String>,
}

/// Breadth-first search over device configurations reachable by single
/// open/close operations that pass the machine interlocks (LOAD_OPEN,
/// PHASE_CLOSE) and never produce a phase tie, for one whose energized set
/// is exactly the initial energized set minus the target's section closure.
/// No grounds are applied and no trains are present, so ground faults and
/// backfeeds cannot arise. `max_depth` bounds the sequence length.
pub fn exact_isolation_search(
    spec: &NetSpec,
    closed0: &[bool],
    in_service: &BTreeSet<String>,
    target_section: usize,
    max_depth: usize,
) -> Option<SearchHit> {
    let n = spec.nodes.len();
    let sources: Vec<(usize, usize)> = spec
        .sources
        .iter()
        .filter(|(id, _)| in_service.contains(id))
        .map(|(_, v)| (*v, spec.zone_of_node(*v)))
        .collect();
    let edges_of = |closed: &[bool]| -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = spec.sections.iter().map(|(_, a, b)| (*a, *b)).collect();
        for (d, (_, _, a, b)) in spec.devices.iter().enumerate() {
            if closed[d] {
                e.push((*a, *b));
            }
        }
        e
    };
    let live = |closed: &[bool]| reach(n, &edges_of(closed), sources.iter().map(|(v, _)| *v));
    let tied = |closed: &[bool]| {
        let e = edges_of(closed);
        sources.iter().any(|(s, zs)| {
            let r = reach(n, &e, [*s]);
            sources.iter().any(|(t, zt)| zt != zs && r[*t])
        })
    };

    let section_edges: Vec<(usize, usize)> = spec.sections.iter().map(|(_, a, b)| (*a, *b)).collect();
    let (_, ta, tb) = &spec.sections[target_section];
    let in_t = reach(n, &section_edges, [*ta, *tb]);
    let live0 = live(closed0);
    let goal: Vec<bool> = (0..n).map(|i| live0[i] && !in_t[i]).collect();

    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut frontier = vec![closed0.to_vec()];
    seen.insert(closed0.to_vec());
    for depth in 0..=max_depth {
        let mut next = Vec::new();
        for c in &frontier {
            let l = live(c);
            if l == goal {
                let energized = (0..n).filter(|&i| l[i]).map(|i| spec.nodes[i].0.clone()).collect();
                return Some(SearchHit { depth, closed: c.clone(), energized });
            }
            for (d, (_, _, a, b)) in spec.devices.iter().enumerate() {
                if c[d] && !spec.oracle_load_break(d) && l[*a] && l[*b] {
                    continue; // LOAD_OPEN
                }
                let mut t = c.clone();
                t[d] = !t[d];
                if tied(&t) {
                    continue; // PHASE_CLOSE / PHASE_TIE
                }
                if seen.insert(t.clone()) {
                    next.push(t);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    None
}

// ---------------------------------------------------------------------------
// Wire runs

#[derive(Clone, Debug)]
pub struct TrolleySection {
    pub id: String,
    pub track: String,
    pub a: String,
    pub b: String,
    pub start: i64,
    pub end: i64,
}

pub fn trolley_sections(text: &str) -> Vec<TrolleySection> {
    lines(text)
        .into_iter()
        .filter(|l| l.keyword == "section" && l.args[1] == "trolley")
        .map(|l| TrolleySection {
            id: l.args[0].clone(),
            track: l.opts["track"].clone(),
            a: l.args[2].clone(),
            b: l.args[3].clone(),
            start: l.args[4].parse().unwrap(),
            end: l.args[5].parse().unwrap(),
        })
        .collect()
}

/// Enumerate every simple path of same-track sections joined at shared
/// nodes; report the section sets of maximal paths longer than `limit_ft`.
pub fn long_wire_paths(sections: &[TrolleySection], limit_ft: i64) -> BTreeSet<Vec<String>> {
    let adjacent = |i: usize, j: usize| {
        let (s, t) = (&sections[i], &sections[j]);
        i != j && s.track == t.track && (s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b)
    };
    let mut out = BTreeSet::new();
    fn walk(
        path: &mut Vec<usize>,
        sections: &[TrolleySection],
        adjacent: &dyn Fn(usize, usize) -> bool,
        limit: i64,
        out: &mut BTreeSet<Vec<String>>,
    ) {
        let last = *path.last().unwrap();
        let mut extended = false;
        for j in 0..sections.len() {
            if adjacent(last, j) && !path.contains(&j) {
                extended = true;
                path.push(j);
                walk(path, sections, adjacent, limit, out);
                path.pop();
            }
        }
        // Maximal only if it cannot grow at its head either.
        let head_open = (0..sections.len()).any(|j| adjacent(path[0], j) && !path.contains(&j));
        if !extended && !head_open {
            let len: i64 = path.iter().map(|&i| sections[i].end - sections[i].start).sum();
            if len > limit {
                let mut ids: Vec<String> = path.iter().map(|&i| sections[i].id.clone()).collect();
                ids.sort();
                out.insert(ids);
            }
        }
    }
    for i in 0..sections.len() {
        walk(&mut vec![i], sections, &adjacent, limit_ft, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Plate orders

#[derive(Clone, Debug)]
pub struct PlateDoc {
    pub switches: BTreeMap<String, i64>,
    /// id -> [(track, lo, hi)]
    pub plates: BTreeMap<String, Vec<(String, i64, i64)>>,
    pub sections: BTreeMap<String, TrolleySection>,
}

pub fn plate_doc(text: &str) -> PlateDoc {
    let mut doc = PlateDoc { switches: BTreeMap::new(), plates: BTreeMap::new(), sections: BTreeMap::new() };
    let mut current = None;
    for l in lines(text) {
        match l.keyword.as_str() {
            "switch" => {
                doc.switches.insert(l.args[0].clone(), l.args[2].parse().unwrap());
            }
            "plate" => {
                current = Some(l.args[0].clone());
                doc.plates.insert(l.args[0].clone(), Vec::new());
            }
            "bar" => {
                let (x, y) = (doc.switches[&l.args[1]], doc.switches[&l.args[2]]);
                doc.plates.get_mut(current.as_ref().unwrap()).unwrap().push((l.args[0].clone(), x.min(y), x.max(y)));
            }
            _ => {}
        }
    }
    for s in trolley_sections(text) {
        doc.sections.insert(s.id.clone(), s);
    }
    doc
}

/// Uncovered stretches of `[lo, hi)` given covering intervals: elementary
/// intervals between all breakpoints, each tested at its midpoint, then merged.
pub fn uncovered(lo: i64, hi: i64, bars: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut points: Vec<i64> = vec![lo, hi];
    for &(a, b) in bars {
        for p in [a, b] {
            if lo < p && p < hi {
                points.push(p);
            }
        }
    }
    points.sort();
    points.dedup();
    let mut gaps: Vec<(i64, i64)> = Vec::new();
    for w in points.windows(2) {
        let mid2 = w[0] + w[1]; // twice the midpoint, to stay in integers
        let covered = bars.iter().any(|&(a, b)| 2 * a <= mid2 && mid2 <= 2 * b);
        if !covered {
            match gaps.last_mut() {
                Some(g) if g.1 == w[0] => g.1 = w[1],
                _ => gaps.push((w[0], w[1])),
            }
        }
    }
    gaps
}

/// Uncovered stretches of each target trolley section under one plate order.
pub fn plate_gaps(doc: &PlateDoc, plate: &str, targets: &[String], margin: i64) -> Vec<(String, i64, i64)> {
    let mut out = Vec::new();
    for t in targets {
        let Some(s) = doc.sections.get(t) else { continue };
        let bars: Vec<(i64, i64)> =
            doc.plates[plate].iter().filter(|(track, _, _)| *track == s.track).map(|(_, a, b)| (*a, *b)).collect();
        for (a, b) in uncovered(s.start - margin, s.end + margin, &bars) {
            out.push((t.clone(), a, b));
        }
    }
    out
}

/// Full scan: the covering plate order with the fewest barred track-feet,
/// ties to the smaller id.
pub fn best_plate(doc: &PlateDoc, targets: &[String], margin: i64) -> Option<String> {
    let mut best: Option<(i64, String)> = None;
    for (id, bars) in &doc.plates {
        if !plate_gaps(doc, id, targets, margin).is_empty() {
            continue;
        }
        let feet: i64 = bars.iter().map(|(_, a, b)| b - a).sum();
        if best.as_ref().is_none_or(|(f, bid)| (feet, id) < (*f, bid)) {
            best = Some((feet, id.clone()));
        }
    }
    best.map(|(_, id)| id)
}

/// The declared six-state machine, as a table: row = state, column = event.
pub fn pops_table(state: PopsState, event: PopsEvent) -> Option<PopsState> {
    use PopsState::*;
    const STATES: [PopsState; 6] = [Idle, Requested, Acknowledged, InEffect, ReleaseRequested, Released];
    // columns: request, acknowledge, put_in_effect, request_release, release, abort
    const TABLE: [[Option<PopsState>; 6]; 6] = [
        [Some(Requested), None, None, None, None, None],
        [None, Some(Acknowledged), None, None, None, Some(Idle)],
        [None, None, Some(InEffect), None, None, Some(Idle)],
        [None, None, None, Some(ReleaseRequested), None, Some(Idle)],
        [None, None, None, None, Some(Released), Some(Idle)],
        [None, None, None, None, None, Some(Idle)],
    ];
    let row = STATES.iter().position(|s| *s == state).unwrap();
    let col = match event {
        PopsEvent::Request => 0,
        PopsEvent::Acknowledge => 1,
        PopsEvent::PutInEffect => 2,
        PopsEvent::RequestRelease => 3,
        PopsEvent::Release => 4,
        PopsEvent::Abort => 5,
    };
    TABLE[row][col]
}

// ---------------------------------------------------------------------------
// Scheduler

/// Binding crafts by direct ratio scan.
pub fn binding_scan(avail: [u32; 5], demand: [u32; 5]) -> Vec<usize> {
    let ratios: Vec<Option<f64>> =
        (0..5).map(|c| if demand[c] == 0 { None } else { Some(avail[c] as f64 / demand[c] as f64) }).collect();
    let Some(min) = ratios.iter().flatten().cloned().reduce(f64::min) else { return Vec::new() };
    (0..5).filter(|&c| ratios[c] == Some(min)).collect()
}

pub fn craft_index(c: Craft) -> usize {
    Craft::ALL.iter().position(|x| *x == c).unwrap()
}

/// Everything about one night that the assignment oracles need.
#[derive(Clone, Debug)]
pub struct NightInputs {
    pub avail: [u32; 5],
    pub outages: Option<u32>,
    pub crews: Option<u32>,
    /// Isolations that can never be planned.
    pub blocked_isolations: BTreeSet<String>,
    pub withdrawn: BTreeSet<String>,
    pub weather: bool,
}

impl NightInputs {
    pub fn from_calendar(calendar: &ResourceCalendar, night: &str) -> Self {
        let n = Night::new(night);
        let crew = calendar.availability.get(&n).copied().unwrap_or_default();
        NightInputs {
            avail: crew.0,
            outages: calendar.track_outages.get(&n).copied(),
            crews: calendar.contractor_crews.get(&n).copied(),
            blocked_isolations: BTreeSet::new(),
            withdrawn: BTreeSet::new(),
            weather: false,
        }
    }
}

/// Choice for one job on one night: variant index, or `None` for cancelled.
pub type Choice = Option<usize>;

fn blocked(inputs: &NightInputs, jobs: &JobBook, job: usize, v: usize) -> bool {
    let j = &jobs.jobs[job];
    let var = &j.variants[v];
    if inputs.withdrawn.contains(j.id.as_str()) {
        return true;
    }
    match &var.isolation {
        Some(iso) => inputs.weather || inputs.blocked_isolations.contains(iso.as_str()),
        None => false,
    }
}

/// Whether the chosen variants fit together on the night.
pub fn feasible(inputs: &NightInputs, jobs: &JobBook, chosen: &[(usize, usize)]) -> bool {
    let mut need = [0u32; 5];
    let mut isolations = BTreeSet::new();
    let (mut outages, mut contractors) = (0, 0);
    for &(j, v) in chosen {
        let var = &jobs.jobs[j].variants[v];
        for c in 0..5 {
            need[c] += var.demand.0[c];
        }
        if let Some(iso) = &var.isolation {
            if isolations.insert(iso.clone()) {
                let o = jobs.isolation_overhead.get(iso).copied().unwrap_or_default();
                for c in 0..5 {
                    need[c] += o.0[c];
                }
            }
        }
        outages += var.track_outage_needed as u32;
        contractors += (jobs.jobs[j].owner == Owner::Contractor) as u32;
    }
    (0..5).all(|c| need[c] <= inputs.avail[c])
        && inputs.outages.is_none_or(|o| outages <= o)
        && inputs.crews.is_none_or(|k| contractors <= k)
}

/// Brute force over every combination of (variant or cancel) per job for the
/// jobs listed (priority order); returns the priority-lexicographic optimum
/// (earlier variants preferred, cancellation worst).
pub fn exhaustive_night(inputs: &NightInputs, jobs: &JobBook, on_night: &[usize]) -> Vec<Choice> {
    let options: Vec<Vec<Choice>> = on_night
        .iter()
        .map(|&j| {
            let mut o: Vec<Choice> =
                (0..jobs.jobs[j].variants.len()).filter(|&v| !blocked(inputs, jobs, j, v)).map(Some).collect();
            o.push(None);
            o
        })
        .collect();
    let rank = |c: &Choice| c.unwrap_or(usize::MAX);
    let mut best: Option<Vec<Choice>> = None;
    let mut idx = vec![0usize; on_night.len()];
    loop {
        let combo: Vec<Choice> = idx.iter().enumerate().map(|(k, &i)| options[k][i]).collect();
        let chosen: Vec<(usize, usize)> =
            on_night.iter().zip(&combo).filter_map(|(&j, c)| c.map(|v| (j, v))).collect();
        if feasible(inputs, jobs, &chosen) {
            let key: Vec<usize> = combo.iter().map(rank).collect();
            if best.as_ref().is_none_or(|b| key < b.iter().map(rank).collect::<Vec<_>>()) {
                best = Some(combo);
            }
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best.expect("all-cancelled is always feasible");
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Stability fill for one night: previously assigned jobs first (priority
/// order) keeping their variant when it still fits, else trying each variant
/// in order; then previously cancelled jobs the same way without a
/// preference. `prev` is indexed like `on_night`.
pub fn stable_night(inputs: &NightInputs, jobs: &JobBook, on_night: &[usize], prev: &[Choice]) -> Vec<Choice> {
    let mut order: Vec<usize> = (0..on_night.len()).filter(|&k| prev[k].is_some()).collect();
    order.extend((0..on_night.len()).filter(|&k| prev[k].is_none()));
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut out: Vec<Choice> = vec![None; on_night.len()];
    for k in order {
        let j = on_night[k];
        let fits = |v: usize, taken: &Vec<(usize, usize)>| {
            if blocked(inputs, jobs, j, v) {
                return false;
            }
            let mut t = taken.clone();
            t.push((j, v));
            feasible(inputs, jobs, &t)
        };
        let mut pick = prev[k].filter(|&v| fits(v, &taken));
        if pick.is_none() {
            pick = (0..jobs.jobs[j].variants.len()).find(|&v| fits(v, &taken));
        }
        if let Some(v) = pick {
            taken.push((j, v));
        }
        out[k] = pick;
    }
    out
}

/// Job indices offered on `night`, in priority order.
pub fn jobs_on(jobs: &JobBook, night: &str) -> Vec<usize> {
    let mut v: Vec<usize> =
        (0..jobs.jobs.len()).filter(|&j| jobs.jobs[j].nights.iter().any(|n| n.as_str() == night)).collect();
    v.sort_by_key(|&j| jobs.jobs[j].priority);
    v
}

// ---------------------------------------------------------------------------
// Event fold

/// Rebuild a state document from `initial` event records.
pub fn state_document_from_initial(events: &[traction_isolation::room::RoomEvent]) -> String {
    let mut doc = String::new();
    for e in events.iter().filter(|e| e.kind == "initial") {
        let f = |k: &str| e.field(k).unwrap_or_default().to_owned();
        let line = match f("record").as_str() {
            "position" => format!("position {} {}", f("device"), f("position")),
            "ground" => format!("ground {}", f("ground")),
            "out_of_service" => format!("out_of_service {}", f("source")),
            "tag" => format!("tag {} {} \"{}\" at={}", f("target"), f("authority"), f("reason"), f("at")),
            "bridge" => format!("bridge {} {}", f("a"), f("b")),
            other => panic!("unknown initial record {other}"),
        };
        doc.push_str(&line);
        doc.push('\n');
    }
    doc
}
