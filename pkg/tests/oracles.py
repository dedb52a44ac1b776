"""Independent reference computations used by the tests.

Nothing here imports the package's dynamics, operator or counting code.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq


def continuants(alphabet, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(q_{k-1}, q_k) for every digit string of length k over the alphabet."""
    qp = np.zeros(1, dtype=np.int64)
    q = np.ones(1, dtype=np.int64)
    for _ in range(k):
        qs = [(q, a * q + qp) for a in alphabet]
        qp = np.concatenate([x for x, _ in qs])
        q = np.concatenate([y for _, y in qs])
    return qp, q


def cylinder_dimension(alphabet, k: int = 14) -> float:
    """Dimension estimate from Gauss cylinder covers at lengths k-1 and k.

    The cylinder of a_1..a_k has length 1/(q_k (q_k + q_{k-1})); s solves
    sum_k |I|^s = sum_{k-1} |I|^s, i.e. the cover's box-counting ratio is 1.
    """
    def lengths(m):
        qp, q = continuants(alphabet, m)
        return 1.0 / (q.astype(float) * (q + qp).astype(float))

    Lk, Lk1 = np.log(lengths(k)), np.log(lengths(k - 1))

    def f(s):
        return math.log(np.exp(s * Lk).sum()) - math.log(np.exp(s * Lk1).sum())

    return brentq(f, 1e-6, 1.0, xtol=1e-14)


def euclid_digits(b: int, d: int) -> list[int]:
    """Partial quotients of b/d in (0, 1]: b/d = 1/(a_1 + 1/(a_2 + ...))."""
    out = []
    num, den = d, b
    while den:
        a, r = divmod(num, den)
        out.append(a)
        num, den = den, r
    return out


def zaremba_denominators(alphabet, bound: int) -> set[int]:
    """Brute force over every coprime b/d with 1 <= b <= d <= bound.

    A rational has two expansions, the regular one and the one whose last
    digit is split as (a_k - 1, 1); either may qualify.
    """
    A = set(alphabet)
    out = set()
    for d in range(1, bound + 1):
        for b in range(1, d + 1):
            if math.gcd(b, d) != 1:
                continue
            dig = euclid_digits(b, d)
            alt = dig[:-1] + [dig[-1] - 1, 1] if dig[-1] > 1 else None
            if set(dig) <= A or (alt is not None and set(alt) <= A):
                out.add(d)
                break
    return out


def adjacency_radius(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(np.asarray(A, dtype=float)))))


def sl2_mod_size(q: int) -> int:
    """|SL_2(Z/q)| by exhaustive enumeration of the q^4 candidate matrices."""
    return sum(1 for a, b, c, d in itertools.product(range(q), repeat=4) if (a * d - b * c) % q == 1)


def mat2(a, b) -> tuple:
    (p, q), (r, s) = a
    (t, u), (v, w) = b
    return ((p * t + q * v, p * u + q * w), (r * t + s * v, r * u + s * w))


def brute_ball_totals(letters, radius_sq: list[Fraction], scale: int = 1) -> list[int]:
    """Cumulative counts of words w with ||g(w)||^2 <= scale R^2, by plain BFS on norms.

    letters: 2x2 integer matrices of the generators (free semigroup).
    """
    top = max(radius_sq) * scale
    counts = [0] * len(radius_sq)
    frontier = [((1, 0), (0, 1))]
    while frontier:
        nxt = []
        for g in frontier:
            n = sum(v * v for row in g for v in row)
            for j, r in enumerate(radius_sq):
                if n <= r * scale:
                    counts[j] += 1
            for L in letters:
                h = mat2(g, L)
                if sum(v * v for row in h for v in row) <= top:
                    nxt.append(h)
        frontier = nxt
    return counts
