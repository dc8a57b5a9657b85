#!/usr/bin/env python3
"""Generates the paper-scale four-track fixture.

Layout (stationing in feet, 56 miles end to end):

* 24 substations every 12,870 ft: supply substations at 0, 8, 16 and 23,
  equalizing substations elsewhere. Each has a bus node (the source) and
  breakers from the bus to the trolley on each side of it, on every track,
  and to both feeder lines (FN, FS) on each side.
* Between two substations each track has three trolley sections of 4,290 ft
  joined by remotely controlled MODs, so no wire run exceeds two miles.
  Catenary structures are taken as 300 ft apart (inferred from the published
  30-structure = 9,000 ft work-zone limit).
* Each feeder line has one section per span, tied in only at substations.
* A phase break lies in the span between substations 11 and 12: the MOD
  between sections b and c is replaced by a normally open tie, and the feeders
  have a normally open tie at the break as well.
* Box ground points sit at every MOD-side trolley node and at every feeder
  node; trolley nodes at the substations have none.
* Five movable bridges are keep-live trolley sections on track 1.
* Crossovers at every substation (1:2 and 3:4) bound 200 plate orders.

Also writes the normal state, the `bridle_removal` request (four tracks and
both feeders around equalizing substation 5), a second director's request
overlapping it (double-header context), the paper's 6/4/2/3/2 gating week,
a week of jobs using the isolation, and the Figure 5 night window.
"""

from pathlib import Path

OUT = Path(__file__).resolve().parent
N_SUB = 24
SPAN = 12_870
THIRD = SPAN // 3
SUPPLY = {0, 8, 16, 23}
TRACKS = [1, 2, 3, 4]
FEEDERS = ["FN", "FS"]
BREAK_SPAN = 11  # span between substations 11 and 12 carries the phase break
BRIDGES = [2, 6, 14, 18, 21]  # spans whose middle track-1 section is a movable bridge
K_STAR = 5


def pos(k):
    return k * SPAN


def zone(k, part):
    """Zone of a node in span k (part 0..3 along the span) or at substation k."""
    if k < BREAK_SPAN or (k == BREAK_SPAN and part < 3):
        return "ZA"
    return "ZB"


def station_zone(k):
    return "ZA" if k <= BREAK_SPAN else "ZB"


def network():
    out = []
    w = out.append
    w("# Four-track electrified main line, 24 substations over 56 miles.")
    w("# Generated by generate.py; edit the generator, not this file.")
    w("# Catenary structures assumed 300 ft apart (inferred, not published).")
    w("zone ZA")
    w("zone ZB")
    for t in TRACKS:
        w(f"track {t}")
    for k in range(N_SUB):
        z = station_zone(k)
        kind = "supply" if k in SUPPLY else "equalizing"
        w(f"node SS{k} {z} {pos(k)}")
        w(f"source S{k} {kind} SS{k}")
        for t in TRACKS:
            if k > 0:
                w(f"node T{t}-{k}W {z} {pos(k)}")
                w(f"device TB{t}-{k}W breaker SS{k} T{t}-{k}W")
            if k < N_SUB - 1:
                w(f"node T{t}-{k}E {z} {pos(k)}")
                w(f"device TB{t}-{k}E breaker SS{k} T{t}-{k}E")
        for f in FEEDERS:
            if k > 0:
                w(f"node {f}-{k}W {z} {pos(k)}")
                w(f"device {f}B-{k}W breaker SS{k} {f}-{k}W")
                w(f"ground G{f}-{k}W box {f}-{k}W")
            if k < N_SUB - 1:
                w(f"node {f}-{k}E {z} {pos(k)}")
                w(f"device {f}B-{k}E breaker SS{k} {f}-{k}E")
                w(f"ground G{f}-{k}E box {f}-{k}E")
    for k in range(N_SUB - 1):
        a, b1, b2, c = pos(k), pos(k) + THIRD, pos(k) + 2 * THIRD, pos(k + 1)
        for t in TRACKS:
            p = f"T{t}-{k}"
            w(f"node {p}a1 {zone(k, 1)} {b1}")
            w(f"node {p}b0 {zone(k, 1)} {b1}")
            w(f"node {p}b1 {zone(k, 2)} {b2}")
            w(f"node {p}c0 {zone(k, 3)} {b2}")
            w(f"section {p}a trolley track={t} T{t}-{k}E {p}a1 {a} {b1}")
            w(f"section {p}b trolley track={t} {p}b0 {p}b1 {b1} {b2}")
            w(f"section {p}c trolley track={t} {p}c0 T{t}-{k + 1}W {b2} {c}")
            w(f"device M{t}-{k}ab mod {p}a1 {p}b0")
            second = "tie" if k == BREAK_SPAN else "mod"
            w(f"device M{t}-{k}bc {second} {p}b1 {p}c0")
            for n in ("a1", "b0", "b1", "c0"):
                w(f"ground G{t}-{k}{n} box {p}{n}")
        for f in FEEDERS:
            if k == BREAK_SPAN:
                mid = (a + c) // 2
                w(f"node {f}-{k}m0 ZA {mid}")
                w(f"node {f}-{k}m1 ZB {mid}")
                w(f"section {f}-{k} feeder {f}-{k}E {f}-{k}m0 {a} {mid} group={f}")
                w(f"section {f}-{k}x feeder {f}-{k}m1 {f}-{k + 1}W {mid} {c} group={f}")
                w(f"device {f}T-{k} tie {f}-{k}m0 {f}-{k}m1")
            else:
                w(f"section {f}-{k} feeder {f}-{k}E {f}-{k + 1}W {a} {c} group={f}")
    for k in BRIDGES:
        w(f"keeplive T1-{k}b")
    for k in range(N_SUB):
        w(f"switch X{k}A 1:2 {pos(k)}")
        w(f"switch X{k}B 3:4 {pos(k)}")
    for k in (0, 8, 16, 23):
        w(f"interlocking I{k} {max(pos(k) - 500, 0)} {pos(k) + 500} switches=X{k}A,X{k}B")
    out.extend(plates())
    return "\n".join(out) + "\n"


def plates():
    """200 plate orders: every 1-, 2- and 3-span window for tracks 1-2, 3-4
    and all four tracks (198), plus whole-line orders for 1-2 and 3-4."""
    out = []
    sets = {"12": [1, 2], "34": [3, 4], "1234": [1, 2, 3, 4]}
    n = 0

    def add(name, tracks, k0, k1):
        nonlocal n
        n += 1
        out.append(f'plate P{n:03d} "{name}"')
        blocked = set()
        for t in tracks:
            x = "A" if t in (1, 2) else "B"
            out.append(f"bar {t} X{k0}{x} X{k1}{x}")
            blocked |= {f"X{k0}{x}", f"X{k1}{x}"}
        for s in sorted(blocked):
            out.append(f"block {s}")

    for length in (1, 2, 3):
        for k in range(N_SUB - length):
            for label, tracks in sets.items():
                add(f"Tracks {label} S{k}-S{k + length}", tracks, k, k + length)
    add("Tracks 12 whole line", sets["12"], 0, N_SUB - 1)
    add("Tracks 34 whole line", sets["34"], 0, N_SUB - 1)
    assert n == 200, n
    return out


def bridle_request():
    k = K_STAR
    targets = []
    for t in TRACKS:
        targets += [f"T{t}-{k - 1}c", f"T{t}-{k}a"]
    for f in FEEDERS:
        targets += [f"{f}-{k - 1}", f"{f}-{k}"]
    return (
        "# Bridle removal at equalizing substation 5: the trolley on both sides of\n"
        "# the substation on all four tracks, plus both feeder lines either side.\n"
        f"request bridle_removal job=J1\ntarget {' '.join(targets)}\n"
    )


def overlap_request():
    k = K_STAR + 1
    return (
        "# A second director's outage in the next span (double-header context).\n"
        f"request track1_span6 job=J5\ntarget T1-{k}b\n"
    )


CRAFTS = ["lineman", "groundman", "director", "flagman", "dispatcher"]


def demand(l, g, d, f, x):
    return " ".join(f"{c}={v}" for c, v in zip(CRAFTS, (l, g, d, f, x)))


def gating():
    jobs = [
        "# The paper's Friday: 6 linemen, 4 groundmen, 2 power directors,",
        "# 3 flagmen and 2 dispatchers, exactly what the submitted work needs.",
        "job J1 prio=1 owner=contractor nights=fri",
        f"variant A {demand(3, 2, 1, 1, 1)} progress=3",
        "job J2 prio=2 owner=in_house nights=fri",
        f"variant A {demand(2, 1, 1, 1, 1)} progress=2",
        "job J3 prio=3 owner=in_house nights=fri",
        f"variant A {demand(1, 0, 0, 0, 0)} progress=1",
        "job J4 prio=4 owner=in_house nights=fri",
        f"variant A {demand(0, 1, 0, 1, 0)} progress=1",
    ]
    cal = [f"avail fri {c} {n}" for c, n in zip(CRAFTS, (6, 4, 2, 3, 2))]
    return "\n".join(jobs) + "\n", "\n".join(cal) + "\n"


def week():
    nights = ["mon", "tue", "wed", "thu", "fri"]
    jobs = [
        "# A week on the four-track line. J1 carries the bridle removal outage;",
        "# J2 piggybacks on it; J5 needs the adjacent single-track outage.",
        "job J1 prio=1 owner=contractor nights=tue,thu",
        f"variant A {demand(3, 2, 1, 1, 1)} isolation=bridle_removal outage=1 progress=4",
        f"variant B {demand(2, 1, 1, 1, 1)} isolation=bridle_removal outage=1 progress=2",
        "job J2 prio=2 owner=in_house nights=tue,thu",
        f"variant A {demand(2, 2, 0, 1, 0)} isolation=bridle_removal outage=1 progress=2",
        f"variant B {demand(0, 1, 0, 1, 0)} progress=1",
        "job J3 prio=3 owner=in_house nights=mon,wed,fri",
        f"variant A {demand(2, 1, 0, 1, 0)} progress=2",
        f"variant B {demand(1, 1, 0, 0, 0)} progress=1",
        f"variant C {demand(0, 1, 0, 0, 0)} progress=0.5",
        "job J4 prio=4 owner=contractor nights=mon,tue,wed,thu,fri",
        f"variant A {demand(1, 1, 0, 1, 0)} progress=1",
        "job J5 prio=5 owner=in_house nights=wed,fri",
        f"variant A {demand(2, 1, 1, 1, 1)} isolation=track1_span6 outage=1 progress=2",
        f"variant B {demand(1, 0, 0, 0, 0)} progress=0.5",
        f"isolation bridle_removal {demand(2, 2, 1, 0, 1)}",
        f"isolation track1_span6 {demand(1, 1, 0, 0, 0)}",
    ]
    cal = []
    for i, n in enumerate(nights):
        avail = (8, 6, 2, 4, 2) if n != "fri" else (6, 4, 2, 3, 2)
        cal += [f"avail {n} {c} {v}" for c, v in zip(CRAFTS, avail)]
        cal.append(f"crews {n} 2")
        cal.append(f"outages {n} {1 if i % 2 == 0 else 2}")
    return "\n".join(jobs) + "\n", "\n".join(cal) + "\n"


def main():
    (OUT / "fourtrack.net").write_text(network())
    (OUT / "fourtrack.state").write_text("# Normal configuration: ties open, everything else closed.\n")
    (OUT / "bridle_removal.req").write_text(bridle_request())
    (OUT / "overlap.req").write_text(overlap_request())
    gj, gc = gating()
    (OUT / "gating.jobs").write_text(gj)
    (OUT / "gating.cal").write_text(gc)
    wj, wc = week()
    (OUT / "fourtrack.jobs").write_text(wj)
    (OUT / "fourtrack.cal").write_text(wc)
    (OUT / "figure5.window").write_text(
        "# The paper's case-study night. Phase totals are the published figures;\n"
        "# the briefing is folded into the field phase.\n"
        "window night=case_study start=22:00 end=05:00 clear=00:15 extension=30\n"
        "durations track_removal_min=30 briefing_min=0 remote_total_min=45 field_total_min=36"
        " restoration_total_min=45\n"
    )
    (OUT / "fourtrack.window").write_text(
        "# A nominal 22:00-05:00 night simulated op by op from the plan.\n"
        "window night=tue start=22:00 end=05:00 clear=00:15\n"
        "durations track_removal_min=30 briefing_min=10 seed=42\n"
    )


if __name__ == "__main__":
    main()
