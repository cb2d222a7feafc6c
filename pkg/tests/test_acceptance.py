"""Acceptance criteria, one test per criterion.

Each test appends a PASS/FAIL line to the session summary and prints it.
The mobile batch (6 protocols x 3 models x 20 seeds at 10 m/s, defaults) is
computed once for the module and takes a few minutes on one core.
"""

import math
import time
from collections import Counter, defaultdict

import numpy as np
import pytest

from conftest import VERDICTS
from mwsnsim import ScenarioConfig, finalize, packet_loss_pct, pdr, simulate
from mwsnsim.experiment import SweepSpec, run_one, run_sweep, to_csv
from mwsnsim.kernel import Kernel, RandomStream
from mwsnsim.mobility import FieldGeometry, MobilityParams, MobilityState, init_state, step
from reference_mobility import RefLinear, RefMass, RefRWP

pytestmark = pytest.mark.slow

PROTOCOLS = ("MAR", "GRC", "GRC-R", "DECA", "DEMC", "DEMC-R")
POSITION = ("MAR", "GRC", "GRC-R")
NON_POSITION = ("DECA", "DEMC", "DEMC-R")
MODELS = ("random-waypoint", "mass", "linear")
SEEDS = tuple(range(1, 21))


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    VERDICTS.append(line)
    print(line)
    return ok


def _audit(world):
    """Per-run clustering message audit, reduced to what the checks need."""
    heads_per_round = Counter(r for r, _, _, _ in world.snapshots)
    members_per_round = Counter()
    for r, _, _, m in world.snapshots:
        members_per_round[r] += m
    per_node = defaultdict(Counter)
    per_round = defaultdict(Counter)
    for rnd, _, node, msg in world.tx_log:
        per_node[rnd][node, msg] += 1
        per_round[rnd][msg] += 1
    return {"heads": dict(heads_per_round), "members": dict(members_per_round),
            "per_node": {r: dict(c) for r, c in per_node.items()},
            "per_round": {r: dict(c) for r, c in per_round.items()},
            "control": sum(world.control_messages().values())}


@pytest.fixture(scope="module")
def batch():
    out = {}
    for p in PROTOCOLS:
        for m in MODELS:
            for s in SEEDS:
                rec, world = simulate(ScenarioConfig(protocol=p, mobility=m, speed=10.0, seed=s))
                audit = _audit(world) if p in NON_POSITION and m == "random-waypoint" else None
                out[p, m, s] = (rec, audit)
    return out


def mean_of(batch, protocols, model, field="pdr_unique"):
    return float(np.mean([getattr(batch[p, model, s][0], field) for p in protocols for s in SEEDS]))


# 1 ---------------------------------------------------------------------------------------

def test_static_sanity():
    bad, slowest = [], 0.0
    for p in PROTOCOLS:
        for s in (1, 2, 3):
            t0 = time.perf_counter()
            rec, _ = simulate(ScenarioConfig(protocol=p, speed=0.0, range=300.0, seed=s))
            slowest = max(slowest, time.perf_counter() - t0)
            if not (f"{rec.pdr_unique:.6f}" == "1.000000" and f"{rec.loss_pct:.6f}" == "0.000000"):
                bad.append((p, s, rec.pdr_unique, rec.loss_pct))
    ok = not bad and slowest < 5.0
    verdict(1, ok, f"static 6 protocols x 3 seeds exact delivery, failures={bad}, slowest run {slowest:.2f}s")
    assert ok


# 2 ---------------------------------------------------------------------------------------

def test_recovery_benefit(batch):
    gains = {}
    for m in MODELS:
        gains[m, "GRC"] = mean_of(batch, ["GRC-R"], m) - mean_of(batch, ["GRC"], m)
        gains[m, "DEMC"] = mean_of(batch, ["DEMC-R"], m) - mean_of(batch, ["DEMC"], m)
    ok = all(g >= 0.02 for g in gains.values())
    detail = ", ".join(f"{m}/{p}-R {g:+.4f}" for (m, p), g in gains.items())
    verdict(2, ok, f"recovery gain >= +0.02: {detail}")
    assert ok


# 3 ---------------------------------------------------------------------------------------

def test_mobility_loss_ordering(batch):
    good = []
    for p in PROTOCOLS:
        loss = {m: mean_of(batch, [p], m, "loss_pct") for m in MODELS}
        if loss["mass"] > loss["random-waypoint"] > loss["linear"]:
            good.append(p)
    ok = len(good) >= 5
    verdict(3, ok, f"loss(mass) > loss(rwp) > loss(linear) holds for {len(good)}/6 protocols {good}")
    assert ok


# 4 ---------------------------------------------------------------------------------------

def test_category_ordering(batch):
    parts = []
    ok = True
    for m in MODELS:
        pos, non = mean_of(batch, POSITION, m), mean_of(batch, NON_POSITION, m)
        ok &= pos > non
        parts.append(f"{m} {pos:.4f} vs {non:.4f}")
    verdict(4, ok, "position-based > non-position-based pdr_unique: " + ", ".join(parts))
    assert ok


# 5 ---------------------------------------------------------------------------------------

def test_metric_identities(batch):
    rng = np.random.default_rng(2024)
    worst_eq, worst_comp = 0.0, 0.0
    for _ in range(10_000):
        sent = int(rng.integers(1, 100_000))
        got = int(rng.integers(0, sent + 1))
        dropped = int(rng.integers(0, sent - got + 1))
        in_flight = sent - got - dropped
        dup = int(rng.integers(0, 50))
        rec = finalize(sent, got, dup, dropped, in_flight)
        worst_eq = max(worst_eq, abs(rec.loss_pct - 100.0 * (sent - got) / sent))
        assert rec.loss_pct == packet_loss_pct(sent, got)
        assert rec.pdr_as_defined == pdr(got + dup, sent)
        clean = finalize(sent, got, 0, sent - got, 0)
        worst_comp = max(worst_comp, abs(clean.loss_pct + 100.0 * clean.pdr_unique - 100.0))
    runs = [rec for rec, _ in batch.values()]
    partition = all(r.sent == r.delivered_unique + r.dropped + r.in_flight_at_end for r in runs)
    ok = worst_eq <= 1e-9 and worst_comp <= 1e-9 and partition
    verdict(5, ok, f"10^4 counter sets: loss error {worst_eq:.1e}, complement error {worst_comp:.1e}; "
                   f"partition holds on {len(runs)} runs: {partition}")
    assert ok


# 6 ---------------------------------------------------------------------------------------

def test_determinism():
    cfgs = [ScenarioConfig(protocol=p, mobility=m, seed=7) for p in ("GRC-R", "DEMC-R") for m in MODELS]
    same_runs = all(to_csv([run_one(c)]) == to_csv([run_one(c)]) for c in cfgs)
    spec = SweepSpec(base=ScenarioConfig(duration=300.0), protocols=PROTOCOLS, mobility_models=MODELS,
                     speeds=(5.0, 10.0), seeds=(1, 2))
    serial, parallel = run_sweep(spec, jobs=1), run_sweep(spec, jobs=8)
    ok = same_runs and serial == parallel
    verdict(6, ok, f"repeat runs identical: {same_runs}; {len(spec.cells())}-run sweep jobs 1 vs 8 "
                   f"byte-identical: {serial == parallel}")
    assert ok


# 7 ---------------------------------------------------------------------------------------

def test_message_counts(batch):
    problems = []
    control = {}
    for p in NON_POSITION:
        totals = []
        for s in SEEDS:
            audit = batch[p, "random-waypoint", s][1]
            totals.append(audit["control"])
            for rnd, per_node in audit["per_node"].items():
                if p == "DECA":
                    clustering = Counter()
                    for (node, msg), n in per_node.items():
                        if msg in ("announce", "join"):
                            clustering[node] += n
                    if clustering and max(clustering.values()) > 1:
                        problems.append((p, s, rnd, "node sent >1 clustering message"))
                else:
                    counts = audit["per_round"][rnd]
                    relays = [n for (node, msg), n in per_node.items() if msg == "relay"]
                    if counts.get("hello", 0):
                        problems.append((p, s, rnd, "hello sent"))
                    if relays and max(relays) > 1:
                        problems.append((p, s, rnd, "member relayed twice"))
                    heads = audit["heads"].get(rnd, 0)
                    members = audit["members"].get(rnd, 0)
                    if counts.get("announce", 0) > heads or sum(relays) > members:
                        problems.append((p, s, rnd, "more clustering messages than heads + relays"))
        control[p] = float(np.mean(totals))
    cheaper = control["DEMC"] < control["DECA"] and control["DEMC-R"] < control["DECA"]
    ok = not problems and cheaper
    verdict(7, ok, f"audit over 20 seeds, violations={problems[:3]}; mean control messages "
                   + ", ".join(f"{p} {v:.1f}" for p, v in control.items()))
    assert ok


# 8 ---------------------------------------------------------------------------------------

FIELD = FieldGeometry(1000.0, 1000.0)


def _reference_error(model):
    p = MobilityParams(model, 2.0, 15.0, pause=3.0 if model == "random-waypoint" else 0.0,
                       speed_sigma=1.0, turn_sigma=0.3, shared_heading=False)
    worst, speed_err = 0.0, 0.0
    for i in range(10):
        ours, theirs = RandomStream(42, f"mobility/{i}"), RandomStream(42, f"mobility/{i}")
        x, y = 100.0 + 80 * i, 900.0 - 70 * i
        s = init_state((x, y), p, FIELD, ours)
        if model == "random-waypoint":
            ref = RefRWP(x, y, 2.0, 15.0, 3.0, 1000.0, 1000.0, theirs)
        elif model == "mass":
            ref = RefMass(x, y, 2.0, 15.0, 1.0, 0.3, 1000.0, 1000.0, theirs)
        else:
            ref = RefLinear(x, y, s.speed, math.atan2(s.vy, s.vx), 1000.0, 1000.0)
        v0 = s.speed
        for _ in range(1000):
            s = step(s, p, 1.0, ours, FIELD)
            ref.step(1.0)
            worst = max(worst, abs(s.x - ref.x), abs(s.y - ref.y))
            if model == "linear":
                speed_err = max(speed_err, abs(s.speed - v0) / v0)
    return worst, speed_err


def _in_field_fuzz(cases):
    rng = np.random.default_rng(99)
    stream = RandomStream(99, "fuzz")
    outside = 0
    for k in range(cases):
        model = MODELS[k % 3]
        vmax = float(rng.uniform(0.0, 30.0))
        p = MobilityParams(model, 0.0, vmax, speed_sigma=2.0, turn_sigma=0.5)
        x, y = (float(v) for v in rng.uniform(0.0, 1000.0, size=2))
        h, sp = float(rng.uniform(0.0, 2 * math.pi)), float(rng.uniform(0.0, vmax))
        target = None
        if model == "random-waypoint":
            target = tuple(float(v) for v in rng.uniform(0.0, 1000.0, size=2))
            h = math.atan2(target[1] - y, target[0] - x)
        out = step(MobilityState(x, y, sp * math.cos(h), sp * math.sin(h), target), p, 1.0, stream, FIELD)
        outside += not FIELD.contains(out.x, out.y)
    return outside


def test_mobility_oracle():
    errors = {m: _reference_error(m) for m in MODELS}
    outside = _in_field_fuzz(100_000)
    ok = all(e <= 1e-9 for e, _ in errors.values()) and errors["linear"][1] <= 1e-12 and outside == 0
    detail = ", ".join(f"{m} max {e:.1e} m" for m, (e, _) in errors.items())
    verdict(8, ok, f"reference match {detail}; linear speed rel error {errors['linear'][1]:.1e}; "
                   f"{outside} of 10^5 fuzz steps left the field")
    assert ok


# 9 ---------------------------------------------------------------------------------------

def test_kernel_ordering_fuzz():
    rng = np.random.default_rng(31337)
    k = Kernel(record=True)
    times = rng.uniform(0.0, 1e4, size=100_000)
    times[::10] = np.round(times[::10])  # force plenty of exact ties
    handles = [k.schedule(float(t), "packet-delivery") for t in times]
    cancelled = {handles[i].seq for i in rng.choice(len(handles), size=10_000, replace=False)}
    for h in handles:
        if h.seq in cancelled:
            k.cancel(h)
    k.run()
    keys = [(t, seq) for t, seq, _, _ in k.log]
    ordered = keys == sorted(keys)
    leaked = len(cancelled & {seq for _, seq in keys})
    complete = len(keys) == len(handles) - len(cancelled)
    ok = ordered and leaked == 0 and complete
    verdict(9, ok, f"10^5 events dispatched in (fire_at, seq) order: {ordered}; "
                   f"cancelled dispatched: {leaked}; all live events fired: {complete}")
    assert ok
