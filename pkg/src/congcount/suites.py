"""Identity suites shared by the verify command and the acceptance tests.

Each suite returns a dict with at least "name" and "ok"; randomised suites
take an explicit seed.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .arithmetic import GaussianInteger
from .congruence import case_traces_match
from .counting import (
    TestFunction,
    compare_sides,
    frobenius_distance_check,
    renewal_sides,
    star_renewal_sides,
)
from .dynamics import hyperbolicity_sandwich, periodic_birkhoff_sum, sample_limit_points
from .errors import DomainError
from .groups import (
    SL2C,
    SO,
    GroupElement,
    complex_translation_length,
    is_hyperbolic,
    product_translation_rhs,
    translation_length,
)
from .semigroup import is_admissible, word_to_element, words_of_length


def trace_cases(pairs: int = 1000, seed: int = 0, box: int = 6) -> dict:
    """Closed-form witness traces against exact products for random Gaussian pairs."""
    rng = np.random.default_rng(seed)
    bad = []
    for _ in range(pairs):
        re = rng.integers(-box, box + 1, size=4)
        a = GaussianInteger(int(re[0]), int(re[1]))
        b = GaussianInteger(int(re[2]), int(re[3]))
        if not case_traces_match(a, b):
            bad.append([str(a), str(b)])
    return {"name": "trace_cases", "ok": not bad, "pairs": pairs, "mismatches": bad[:10]}


def _random_sl2c(rng) -> np.ndarray:
    while True:
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        det = np.linalg.det(M)
        if abs(det) > 0.5:
            return M / np.sqrt(det)


def _element(M: np.ndarray) -> GroupElement:
    return GroupElement(SL2C, tuple(tuple(complex(v) for v in row) for row in M))


def translation_lemma(pairs: int = 100, seed: int = 0, tol: float = 1e-9) -> dict:
    """cosh((l + i theta)(gh)/2) against the product formula, sign resolved by the minimum."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    done = 0
    while done < pairs:
        s, t = rng.uniform(0.2, 3.0, size=2)
        Q = _random_sl2c(rng)
        g = np.diag([math.exp(s), math.exp(-s)]).astype(complex)
        h = Q @ np.diag([math.exp(t), math.exp(-t)]) @ np.linalg.inv(Q)
        gh = _element(g @ h)
        if not is_hyperbolic(gh):
            continue
        lg = complex_translation_length(_element(g))[0]
        lh = complex_translation_length(_element(h))[0]
        l, th = complex_translation_length(gh)
        lhs = np.cosh(complex(l, th) / 2)
        rhs = product_translation_rhs(lg, lh, Q)
        worst = max(worst, min(abs(lhs - rhs), abs(lhs + rhs)))
        done += 1
    return {"name": "translation_lemma", "ok": bool(worst < tol), "pairs": pairs, "max_deviation": float(worst)}


def sandwich(spec, samples: int = 10_000, seed: int = 0) -> dict:
    if spec.kind != "cf":
        return {"name": "sandwich", "ok": True, "skipped": "Schottky spec"}
    r = hyperbolicity_sandwich(spec, samples, seed)
    return {"name": "sandwich", "ok": r["violations"] == 0, **r}


def periodic_orbits(spec, max_length: int = 5, tol: float = 1e-8) -> dict:
    """tau_k at the periodic point of each cyclic word against l(g(word))."""
    worst, checked = 0.0, 0
    for k in range(1, max_length + 1):
        for w in words_of_length(spec, k):
            if not is_admissible(w + w[:1], spec):
                continue
            dev = abs(periodic_birkhoff_sum(w, spec) - translation_length(word_to_element(w, spec)))
            worst = max(worst, dev)
            checked += 1
    return {"name": "periodic_orbits", "ok": worst < tol, "words": checked, "max_deviation": float(worst)}


def _random_test_function(spec, rng) -> TestFunction:
    entries = []
    for _ in range(int(rng.integers(0, 4))):
        k = int(rng.integers(1, 3))
        w = tuple(int(v) for v in rng.integers(0, spec.N, size=k))
        if is_admissible(w, spec):
            entries.append((w, float(rng.uniform(0, 2))))
    return TestFunction(tuple(entries), float(rng.uniform(0.5, 1.5)))


def renewal(spec, qs=(2, 3), instances: int = 100, seed: int = 0, r_max: float = 5.0,
            tol: float = 1e-9) -> dict:
    """Both renewal equations at random (r, point or base word, test function)."""
    rng = np.random.default_rng(seed)
    U, _ = sample_limit_points(spec, instances, seed)
    failures, worst, checked = [], 0.0, 0
    for q in qs:
        for i in range(instances):
            r = float(rng.uniform(-0.5, r_max))
            F = _random_test_function(spec, rng)
            u = U[i]
            lhs, rhs, _ = renewal_sides(spec, q, r, u, F)
            exact, disc = compare_sides(lhs, rhs, tol)
            worst = max(worst, disc)
            if not (exact and disc <= tol):
                failures.append({"kind": "boundary", "q": str(q), "r": r})
            k = int(rng.integers(0, 3))
            w0 = tuple(int(v) for v in rng.integers(0, spec.N, size=k))
            if not is_admissible(w0, spec):
                w0 = ()
            lhs, rhs, _ = star_renewal_sides(spec, q, r, w0, F)
            exact, disc = compare_sides(lhs, rhs, tol)
            worst = max(worst, disc)
            if not (exact and disc <= tol):
                failures.append({"kind": "ball", "q": str(q), "r": r, "gamma0": list(w0)})
            checked += 2
    return {"name": "renewal", "ok": not failures, "checked": checked, "max_discrepancy": worst,
            "failures": failures[:10]}


def frobenius_distance(spec, radii=(10, 100, 1000), gamma0=()) -> dict:
    if spec.setting == SO:
        return {"name": "frobenius_distance", "ok": True, "skipped": "SO setting"}
    r = frobenius_distance_check(spec, radii, gamma0)
    return {"name": "frobenius_distance", "ok": r["violations"] == 0, **r}


def run_all(spec, seed: int = 0, periodic_max_length: int | None = None,
            renewal_instances: int | None = None, qs=(2, 3)) -> list[dict]:
    if periodic_max_length is None:
        periodic_max_length = 5 if spec.N <= 4 else 3
    small = spec.N <= 4
    radii = (10, 100, 1000) if small else (10, 100)
    if renewal_instances is None:
        renewal_instances = 100 if small else 20
    return [
        trace_cases(seed=seed),
        translation_lemma(seed=seed),
        sandwich(spec, seed=seed),
        periodic_orbits(spec, periodic_max_length),
        renewal(spec, qs, renewal_instances, seed, r_max=5.0 if small else 3.0),
        frobenius_distance(spec, radii),
    ]
