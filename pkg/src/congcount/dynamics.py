"""The expanding map T, cylinders, the distortion tau and related probes.

Points are complex scalars/arrays for the SL2 settings (real alphabets
keep a zero imaginary part) and float vectors of length n-1 for SO.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .groups import (
    SO,
    Ball,
    apply_points,
    ball_image,
    fixed_points,
    log_derivative_points,
    point_distance,
)
from .semigroup import anchor_point, is_admissible, word_to_element, words_of_length


def _as_points(spec, x) -> np.ndarray:
    if spec.setting == SO:
        return np.atleast_2d(np.asarray(x, dtype=float))
    return np.atleast_1d(np.asarray(x, dtype=complex))


def _scalar(spec, X):
    return X[0] if spec.setting == SO else complex(X[0])


def symbols_of(spec, X) -> np.ndarray:
    """Symbol of each point, -1 when outside every disk; ambiguous points raise."""
    X = _as_points(spec, X)
    out = np.full(len(X), -1, dtype=np.int64)
    for j in range(spec.N):
        m = spec.in_disk(j, X)
        if (m == 0).any():
            raise DomainError(f"point within the guard band of disk {j}")
        hit = m > 0
        if (hit & (out >= 0)).any():
            raise DomainError("point lies in two disks")
        out[hit] = j
    return out


def expanding_map(x, spec):
    """(T x, j) with T = g_j^{-1} on D_j."""
    X = _as_points(spec, x)
    j = int(symbols_of(spec, X)[0])
    if j < 0:
        raise DomainError("point lies outside every disk")
    return _scalar(spec, apply_points(spec.generators[j].inverse(), X)), j


def distortion_points(spec, X, symbols) -> np.ndarray:
    """tau = log |T'| at points with known symbols."""
    X = _as_points(spec, X)
    out = np.empty(len(X))
    for j in np.unique(symbols):
        sel = symbols == j
        out[sel] = log_derivative_points(spec.generators[j].inverse(), X[sel])
    return out


def distortion(x, spec) -> float:
    X = _as_points(spec, x)
    j = symbols_of(spec, X)
    if j[0] < 0:
        raise DomainError("point lies outside every disk")
    return float(distortion_points(spec, X, j)[0])


class OrbitExit(DomainError):
    def __init__(self, step):
        super().__init__(f"orbit left the domain at step {step}")
        self.step = step


def birkhoff_sum(x, k: int, spec) -> float:
    """tau_k(x) = sum_{j<k} tau(T^j x)."""
    if k < 0:
        raise DomainError("k must be nonnegative")
    total = 0.0
    X = _as_points(spec, x)
    for step in range(k):
        try:
            j = symbols_of(spec, X)
        except DomainError as exc:
            raise OrbitExit(step) from exc
        if j[0] < 0:
            raise OrbitExit(step)
        total += float(distortion_points(spec, X, j)[0])
        X = apply_points(spec.generators[j[0]].inverse(), X)
    return total


def iterate(x, k: int, spec):
    X = _as_points(spec, x)
    for step in range(k):
        j = symbols_of(spec, X)
        if j[0] < 0:
            raise OrbitExit(step)
        X = apply_points(spec.generators[j[0]].inverse(), X)
    return _scalar(spec, X)


def periodic_point(word: Sequence[int], spec):
    """Attracting fixed point of g(word): the point with itinerary word^infinity."""
    word = tuple(word)
    if not word:
        raise DomainError("empty word has no periodic point")
    if not is_admissible(word + word[:1], spec):
        raise DomainError(f"word {word} is not cyclically admissible")
    p = fixed_points(word_to_element(word, spec))[0]
    if spec.setting == SO:
        return np.asarray(p, dtype=float)
    return complex(p)


def periodic_birkhoff_sum(word: Sequence[int], spec) -> float:
    """tau_k along the periodic orbit of word, each orbit point taken as the fixed
    point of a rotated word (forward iteration of T loses about e^{l} ulps)."""
    word = tuple(word)
    total = 0.0
    for j in range(len(word)):
        rot = word[j:] + word[:j]
        u = _as_points(spec, periodic_point(rot, spec))
        total += float(distortion_points(spec, u, np.array([rot[0]]))[0])
    return total


# ---------------------------------------------------------------- cylinders

@dataclass(frozen=True)
class Cylinder:
    word: tuple
    hull: Ball
    anchor: object

    @property
    def length(self) -> int:
        return len(self.word)


def cylinder_hull(spec, word) -> Ball:
    if spec.kind == "cf":
        return ball_image(word_to_element(word, spec), spec.base_ball)
    g = word_to_element(word[:-1], spec)
    return ball_image(g, spec.disks[word[-1]])


def cylinder_anchor(spec, word):
    p = anchor_point(spec, word[-1])
    X = _as_points(spec, p)
    return _scalar(spec, apply_points(word_to_element(word, spec), X))


def cylinders_at_depth(spec, k: int) -> list[Cylinder]:
    """One cylinder per admissible word of length k + 1 (k = 0: the base disks)."""
    if k < 0:
        raise DomainError("depth must be nonnegative")
    return [Cylinder(w, cylinder_hull(spec, w), cylinder_anchor(spec, w))
            for w in words_of_length(spec, k + 1)]


# ---------------------------------------------------------------- limit-set samples

def random_words(spec, count: int, length: int, rng) -> np.ndarray:
    """Admissible random words, one row each; row i only depends on the first i+1 rows of draws."""
    U = rng.random((count, length))
    A = spec.transition
    allowed = [np.flatnonzero(A[j]) for j in range(spec.N)]
    width = max(len(a) for a in allowed)
    table = np.array([np.pad(a, (0, width - len(a))) for a in allowed])
    sizes = np.array([len(a) for a in allowed])
    W = np.empty((count, length), dtype=np.int64)
    W[:, 0] = np.minimum((U[:, 0] * spec.N).astype(np.int64), spec.N - 1)
    for i in range(1, length):
        last = W[:, i - 1]
        k = np.minimum((U[:, i] * sizes[last]).astype(np.int64), sizes[last] - 1)
        W[:, i] = table[last, k]
    return W


def apply_words(spec, W: np.ndarray) -> np.ndarray:
    """g_{w_0} ... g_{w_{k-1}} (omega(w_{k-1})) for every row w of W."""
    count, length = W.shape
    om = [anchor_point(spec, j) for j in range(spec.N)]
    if spec.setting == SO:
        X = np.array(om, dtype=float)[W[:, -1]]
    else:
        X = np.array(om, dtype=complex)[W[:, -1]]
    for i in range(length - 1, -1, -1):
        for j in range(spec.N):
            sel = W[:, i] == j
            if sel.any():
                X[sel] = apply_points(spec.generators[j], X[sel])
    return X


def sample_limit_points(spec, count: int, seed: int, length: int = 40):
    """Seeded random points of the limit set together with their first symbols.

    Points are images of anchors under random admissible words; a larger
    count extends the sample without changing its first entries.
    """
    W = random_words(spec, count, length, np.random.default_rng(seed))
    return apply_words(spec, W), W[:, 0].copy()


def hyperbolicity_sandwich(spec, samples: int = 10_000, seed: int = 0) -> dict:
    """Count sampled points where |T'| leaves [(1 + eps)^4, (1 + C)^4] (CF specs)."""
    if spec.kind != "cf":
        raise DomainError("the sandwich bounds are stated for continued-fraction specs")
    U, syms = sample_limit_points(spec, samples, seed)
    tau = distortion_points(spec, U, syms)
    lo, hi = spec.contraction_bounds()
    lo4, hi4 = 4 * math.log(lo), 4 * math.log(hi)
    bad = int(np.count_nonzero((tau < lo4) | (tau > hi4)))
    return {"violations": bad, "samples": samples, "min": float(np.exp(tau.min())),
            "max": float(np.exp(tau.max())), "lower": lo ** 4, "upper": hi ** 4}


# ---------------------------------------------------------------- LNIC

def _section_log_derivative(spec, word, X):
    return log_derivative_points(word_to_element(word, spec), X)


def lnic_probe(spec, m: int, sample_count: int = 200, seed: int = 0, max_pairs: int | None = None):
    """Best section pair for the local non-integrability quotient.

    For sections v1, v2 of T^m (admissible words of length m), Delta(u) =
    tau_m(v1 u) - tau_m(v2 u) = log|v2'(u)| - log|v1'(u)|.  For each pair the
    minimum of |Delta(u) - Delta(u')| / |u - u'| over sampled limit points
    u, u' in a common base disk is taken; the pair maximising it is returned.
    """
    if m < 1:
        raise DomainError("m must be at least 1")
    sections = list(words_of_length(spec, m))
    pairs = list(itertools.combinations(range(len(sections)), 2))
    if not pairs:
        raise DomainError("no pair of distinct sections")
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = np.random.default_rng(seed + 1)
        pairs = [pairs[i] for i in sorted(rng.choice(len(pairs), max_pairs, replace=False))]
    U, syms = sample_limit_points(spec, sample_count, seed)
    logd = np.array([_section_log_derivative(spec, w, U) for w in sections])
    best = (-1.0, None)
    results = []
    for a, b in pairs:
        wa, wb = sections[a], sections[b]
        q = math.inf
        for k in range(spec.N):
            if not (spec.admissible_pair(wa[-1], k) and spec.admissible_pair(wb[-1], k)):
                continue
            sel = np.flatnonzero(syms == k)
            if len(sel) < 2:
                continue
            D = logd[b, sel] - logd[a, sel]
            i, j = np.triu_indices(len(sel), 1)
            dist = point_distance(U[sel][i], U[sel][j])
            ok = dist > 0
            if ok.any():
                q = min(q, float(np.min(np.abs(D[i] - D[j])[ok] / dist[ok])))
        if q == math.inf:
            continue
        results.append((wa, wb, q))
        if q > best[0]:
            best = (q, (wa, wb))
    if best[1] is None:
        raise DomainError("no section pair has two sample points in a common disk")
    return {"pair": best[1], "delta0": best[0], "pairs_tested": len(results)}


# ---------------------------------------------------------------- temporal distance

def contraction_rate(spec, samples: int = 400, seed: int = 0) -> float:
    """Largest |g_j'| over sampled limit points (an estimate of 1/kappa)."""
    U, syms = sample_limit_points(spec, samples, seed, length=20)
    best = 0.0
    for j, g in enumerate(spec.generators):
        ok = spec.transition[j, syms]
        if ok.any():
            best = max(best, float(np.exp(np.max(log_derivative_points(g, U[ok])))))
    return best


def temporal_distance(alpha, beta, u, u2, spec, depth: int = 40):
    """Partial sum Delta_alpha(u, u') - Delta_beta(u, u') and a tail estimate.

    Delta_alpha(u, u') = sum_j tau(g_{a_j}...g_{a_0} u) - tau(g_{a_j}...g_{a_0} u').
    """
    U = _as_points(spec, [u, u2] if spec.setting != SO else np.vstack([u, u2]))
    syms = symbols_of(spec, U)
    if syms[0] != syms[1] or syms[0] < 0:
        raise DomainError("u and u' must lie in a common disk")
    k = int(syms[0])
    depth = min(depth, len(alpha), len(beta))

    def delta(seq):
        seq = tuple(seq[:depth])
        if not is_admissible((k,) + seq, spec):
            raise DomainError(f"sequence {seq[:5]}... is not admissible after symbol {k}")
        Z = U.copy()
        total, last = 0.0, 0.0
        for s in seq:
            g = spec.generators[s]
            ld = log_derivative_points(g, Z)
            last = float(-ld[0] + ld[1])
            total += last
            Z = apply_points(g, Z)
        return total, abs(last)

    da, la = delta(alpha)
    db, lb = delta(beta)
    rho = contraction_rate(spec)
    tail = (la + lb) * rho / (1 - rho) if rho < 1 else math.inf
    return da - db, tail
