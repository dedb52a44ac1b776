"""Acceptance checks, one test per criterion.

Each test prints a single "PASS/FAIL criterion N: ..." line; the lines are
also collected and repeated in the pytest terminal summary.  Run directly
with `python3 tests/test_acceptance.py` for the lines alone.
"""
import json
import math
import os
import time

import numpy as np
import pytest

from congcount import suites
from congcount.cli import COMMANDS, run
from congcount.congruence import cycle_control, expander_report
from congcount.counting import ball_count, equidistribution_report, exponent_fit, zaremba_density, zaremba_sets
from congcount.dynamics import lnic_probe
from congcount.semigroup import cf_spec
from congcount.thermo import bowen_delta, congruence_decay_probe, gibbs_check
from oracles import cylinder_dimension, zaremba_denominators

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RESULTS: list[str] = []

# the counting ledger is shared by criteria 8 and 9
_LEDGER = {}


def report(n: int, ok: bool, elapsed: float, limit: float | None, detail: str) -> None:
    timed = limit is None or elapsed < limit
    status = "PASS" if ok and timed else "FAIL"
    budget = f" (limit {limit:g} s)" if limit is not None else ""
    line = f"{status} criterion {n}: {detail}; {elapsed:.2f} s{budget}"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert timed, line


@pytest.fixture(scope="module")
def cf():
    return cf_spec([1, 2])


def _timed(fn, *a, **kw):
    t = time.perf_counter()
    out = fn(*a, **kw)
    return out, time.perf_counter() - t


def test_criterion_01_trace_formulas():
    r, dt = _timed(suites.trace_cases, pairs=1000, seed=0)
    report(1, r["ok"], dt, 1.0, f"{r['pairs']} Gaussian pairs, {len(r['mismatches'])} mismatches")


def test_criterion_02_translation_lemma():
    r, dt = _timed(suites.translation_lemma, pairs=100, seed=0)
    report(2, r["max_deviation"] < 1e-9, dt, 1.0, f"max deviation {r['max_deviation']:.2e} (tol 1e-9)")


def test_criterion_03_sandwich(cf):
    r, dt = _timed(suites.sandwich, cf, samples=10_000, seed=0)
    report(3, r["violations"] == 0, dt, 1.0, f"{r['violations']} violations over 10^4 points")


def test_criterion_04_periodic_orbits(cf):
    r, dt = _timed(suites.periodic_orbits, cf, 5, 1e-8)
    report(4, r["ok"], dt, 5.0, f"{r['words']} cyclic words, max deviation {r['max_deviation']:.2e} (tol 1e-8)")


def test_criterion_05_bowen_dimension(cf):
    t = time.perf_counter()
    d8 = bowen_delta(cf, depth=8)["delta"]
    d10 = bowen_delta(cf, depth=10)["delta"]
    dt = time.perf_counter() - t
    oracle = cylinder_dimension([1, 2], 14)
    ok = abs(d8 - d10) < 1e-4 and abs(d10 - oracle) < 5e-3
    report(5, ok, dt, 30.0, f"delta(8) = {d8:.10f}, delta(10) = {d10:.10f}, oracle {oracle:.10f}")


def test_criterion_06_gibbs(cf):
    t = time.perf_counter()
    delta = bowen_delta(cf)["delta"]
    ratios = {d: (lambda g: g["c2"] / g["c1"])(gibbs_check(cf, delta, d)) for d in (6, 10)}
    dt = time.perf_counter() - t
    r6, r10 = ratios[6], ratios[10]
    ok = all(math.isfinite(r) and r > 0 for r in (r6, r10)) and abs(r10 - r6) / r6 < 0.10
    report(6, ok, dt, 30.0, f"c2/c1 = {r6:.4f} (depth 6), {r10:.4f} (depth 10)")


def test_criterion_07_renewal(cf):
    r, dt = _timed(suites.renewal, cf, (2, 3), 100, 0, 5.0, 1e-9)
    report(7, r["ok"], dt, 10.0,
           f"{r['checked']} instances at q in {{2,3}}, max weight discrepancy {r['max_discrepancy']:.1e}")


def _ledger(cf):
    if "led" not in _LEDGER:
        _LEDGER["led"], _LEDGER["dt"] = _timed(ball_count, cf, 3, R0=10_000, checkpoints=10, budget=10 ** 7)
    return _LEDGER["led"], _LEDGER["dt"]


def test_criterion_08_counting_exponent(cf):
    led, dt = _ledger(cf)
    slope = exponent_fit(led)["slope"]
    target = 2 * bowen_delta(cf)["delta"]
    ok = not led.partial and abs(slope - target) / target < 0.10
    report(8, ok, dt, 120.0, f"slope {slope:.4f} vs 2 delta = {target:.4f} "
           f"({abs(slope - target) / target:.1%} off), {int(led.totals[-1])} elements")


def test_criterion_09_equidistribution(cf):
    led, dt = _ledger(cf)
    tv = equidistribution_report(led)["tv_attained"]
    ok = tv[-1] < tv[0] and tv[-1] < 0.05
    report(9, ok, dt, 120.0, f"TV at q=3: first {tv[0]:.4f}, final {tv[-1]:.4f} (< 0.05)")


def test_criterion_10_spectral_decay(cf):
    t = time.perf_counter()
    probes = [congruence_decay_probe(cf, q, 0.0, seed=0) for q in (2, 3, 5)]
    dt = time.perf_counter() - t
    etas = [p["eta"] for p in probes]
    # the constant-in-group input is an eigenvector for eigenvalue 1: it must not decay
    kept = [p["control_norms"][-1] / p["control_norms"][0] for p in probes]
    ok = all(e is not None and e > 0 for e in etas) and all(k > 0.5 for k in kept)
    report(10, ok, dt, 60.0, "eta " + ", ".join(f"q={p['q']}: {p['eta']:.3f}" for p in probes)
           + f"; control retains >= {min(kept):.3f} of its norm")


def test_criterion_11_expander(cf):
    t = time.perf_counter()
    reps = [expander_report(cf, q, p, 0, 0) for q in (2, 3, 5, 7) for p in (1, 2)]
    cycles = [cycle_control(n) for n in (5, 8, 13)]
    dt = time.perf_counter() - t
    gaps = [r["lambda2"] for r in reps]
    full = max(abs(r["full_group_lambda2"] - 1) for r in reps)
    cyc = max(abs(c["lambda2"] - c["expected"]) for c in cycles)
    ok = min(gaps) > 0 and full < 1e-10 and cyc < 1e-10
    report(11, ok, dt, 60.0, f"min lambda2 {min(gaps):.4f} over 8 graphs, "
           f"full-group error {full:.1e}, cycle error {cyc:.1e}")


def test_criterion_12_zaremba():
    t = time.perf_counter()
    alph = [1, 2, 3, 4, 5]
    _, D = zaremba_sets(alph, 500, fractions=False)
    same = D == zaremba_denominators(alph, 500)
    d3, d4 = zaremba_density(alph, 1000), zaremba_density(alph, 10_000)
    dt = time.perf_counter() - t
    ok = same and d4 >= d3 - 0.01
    report(12, ok, dt, 60.0, f"oracle match on [1,500]: {same}; density(1e3) = {float(d3):.4f}, "
           f"density(1e4) = {float(d4):.4f}")


def test_criterion_13_lnic(cf):
    t = time.perf_counter()
    vals = {m: lnic_probe(cf, m, 200, seed=0)["delta0"] for m in (1, 2)}
    dt = time.perf_counter() - t
    report(13, max(vals.values()) > 0, dt, 30.0,
           ", ".join(f"m={m}: delta0 = {v:.4f}" for m, v in vals.items()))


def test_criterion_14_determinism(tmp_path):
    cfg = os.path.join(ROOT, "configs", "cf12.json")
    t = time.perf_counter()
    codes = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes += [run([cmd, "--config", cfg, "--out", str(out)]) for cmd in COMMANDS]
    dt = time.perf_counter() - t
    a, b = tmp_path / "run0", tmp_path / "run1"
    names = sorted(os.listdir(a))
    differ = [n for n in names if (a / n).read_bytes() != (b / n).read_bytes()]
    ok = names == sorted(os.listdir(b)) and not differ and all(c == 0 for c in codes)
    for cmd in COMMANDS:
        json.loads((a / f"{cmd}.json").read_text())
    report(14, ok, dt, None, f"{len(COMMANDS)} commands x 2 runs, {len(names)} files, "
           f"{len(differ)} differ, exit codes {sorted(set(codes))}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
