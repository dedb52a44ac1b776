"""Norm-ball and boundary counts, renewal checks, counting statistics, Zaremba sets."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arithmetic import GaussianInteger
from .congruence import generator_indices, quotient_group
from .dynamics import _as_points, symbols_of
from .errors import DomainError, ResourceError
from .groups import SL2C, SO, apply_points, frobenius_norm_sq, log_derivative_points
from .semigroup import distance_bound_from_norm, is_admissible, word_to_element

DEFAULT_BUDGET = 10_000_000
CHUNK = 1 << 17


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Locally constant weight: value of the longest listed prefix of a word, else default."""

    __test__ = False  # not a pytest class

    entries: tuple = ()
    default: float = 1.0

    def __post_init__(self):
        table = {}
        for w, v in self.entries:
            v = float(v)
            if not math.isfinite(v):
                raise DomainError("test function values must be finite")
            table[tuple(int(s) for s in w)] = v
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "max_len", max((len(w) for w in table), default=0))

    def value(self, word: Sequence[int]) -> float:
        word = tuple(word)
        for m in range(min(self.max_len, len(word)), 0, -1):
            v = self._table.get(word[:m])
            if v is not None:
                return v
        return self._table.get((), self.default)

    @property
    def sup(self) -> float:
        return max([abs(self.default)] + [abs(v) for v in self._table.values()])

    @classmethod
    def constant(cls, c: float = 1.0) -> "TestFunction":
        return cls((), c)


# ---------------------------------------------------------------- integer matrices

def _int_matrix(g) -> np.ndarray:
    """Integer matrix of g; Gaussian entries use the 2x2 real block embedding."""
    if g.setting == SL2C:
        out = np.zeros((4, 4), dtype=object)
        for i in range(2):
            for j in range(2):
                z = GaussianInteger.coerce(g.m[i][j])
                out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[z.re, -z.im], [z.im, z.re]]
        return out
    return np.array([[int(v) for v in row] for row in g.m], dtype=object)


def _norm_scale(spec) -> int:
    # the block embedding doubles the Frobenius norm squared
    return 2 if spec.setting == SL2C else 1


# ---------------------------------------------------------------- ledger

@dataclass
class CountLedger:
    radii: list                 # R_j as floats
    radius_sq: list             # R_j^2 as exact Fractions
    q: object
    gamma0: tuple
    group_size: int
    counts: np.ndarray          # (checkpoints, group size), cumulative in R
    weighted: np.ndarray        # same shape, F-weighted sums
    enumerated: int = 0
    partial: bool = False
    class_keys: list = field(default_factory=list, repr=False)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def attained(self, j: int = -1) -> int:
        return int(np.count_nonzero(self.counts[j]))

    def to_json(self) -> dict:
        return {
            "q": str(self.q),
            "gamma0": list(self.gamma0),
            "group_size": self.group_size,
            "radii": [float(r) for r in self.radii],
            "totals": [int(t) for t in self.totals],
            "attained_classes": [self.attained(j) for j in range(len(self.radii))],
            "enumerated": self.enumerated,
            "partial": self.partial,
        }

    def rows(self):
        """(R, class_index, count, weighted_sum) for every nonzero class at every checkpoint."""
        for j, R in enumerate(self.radii):
            for c in np.flatnonzero(self.counts[j]):
                yield float(R), int(c), int(self.counts[j, c]), float(self.weighted[j, c])


def default_radius_sq(R0=10, checkpoints: int = 10) -> list:
    """R_j^2 = R0^2 2^j, i.e. R_j = R0 2^{j/2}."""
    r0 = Fraction(R0) ** 2
    return [r0 * 2 ** j for j in range(checkpoints)]


def _radius_sq(radii) -> list:
    out = []
    for R in radii:
        if isinstance(R, str):
            R = Fraction(R)
        R = Fraction(R)
        if R <= 0:
            raise DomainError("radii must be positive")
        out.append(R * R)
    return out


def _f_table(spec, F: TestFunction, gamma0: tuple):
    """F on the words gamma + gamma0, keyed by (length of gamma's prefix, prefix code)."""
    L = F.max_len
    N = spec.N
    tables = []
    for m in range(L + 1):
        t = np.empty(N ** m)
        for code in range(N ** m):
            w = []
            c = code
            for _ in range(m):
                w.append(c % N)
                c //= N
            t[code] = F.value(tuple(reversed(w)) + gamma0)
        tables.append(t)
    return tables


def ball_count(spec, q=1, gamma0: Sequence[int] = (), radii=None, F: TestFunction | None = None,
               budget: int = DEFAULT_BUDGET, R0=10, checkpoints: int = 10,
               cap: int = 10_000) -> CountLedger:
    """Per-class counts of gamma with ||gamma gamma0|| / ||gamma0|| <= R_j at every checkpoint.

    Membership is decided exactly: ||gamma gamma0||^2 <= floor(R_j^2 ||gamma0||^2).
    Enumeration is breadth-first in numpy batches with monotone pruning
    (norm for CF specs, the base-point margin for Schottky specs).
    """
    gamma0 = tuple(int(s) for s in gamma0)
    g0 = word_to_element(gamma0, spec)
    rsq = default_radius_sq(R0, checkpoints) if radii is None else _radius_sq(radii)
    if any(b <= a for a, b in zip(rsq, rsq[1:])):
        raise DomainError("radius schedule must be increasing")
    F = F or TestFunction.constant(1.0)
    grp = quotient_group(spec, q, cap=cap)
    gidx = generator_indices(spec, grp)
    perms = [grp.right_perm(h) for h in gidx]
    scale = _norm_scale(spec)
    n0 = frobenius_norm_sq(g0)
    n0inv = frobenius_norm_sq(g0.inverse())
    thresholds = [math.floor(r * n0) * scale for r in rsq]
    bound = math.floor(rsq[-1] * n0 * n0inv) * scale
    gens = [_int_matrix(g) for g in spec.generators]
    G0 = _int_matrix(g0)
    D = G0.shape[0]
    gmax = max(int(np.abs(g).max()) for g in gens + [G0])
    # switch to Python ints if int64 could overflow anywhere
    big = (bound * (gmax * D) ** 4) >= 2 ** 62
    dtype = object if big else np.int64
    gens = [g.astype(dtype) for g in gens]
    G0 = G0.astype(dtype)
    thr = np.array(thresholds, dtype=dtype)
    if spec.kind == "schottky":
        dmax = distance_bound_from_norm(spec, Fraction(bound, scale)) + spec.base_point_margin
        corner_cap = math.cosh(dmax) + 1e-9
    tables = _f_table(spec, F, gamma0)
    L = F.max_len
    first0 = gamma0[0] if gamma0 else None

    m = len(rsq)
    counts = np.zeros((m, grp.size), dtype=np.int64)
    weighted = np.zeros((m, grp.size))
    ledger = CountLedger([math.sqrt(r) for r in rsq], rsq, q, gamma0, grp.size, counts, weighted,
                         class_keys=grp.keys)

    # frontier: matrices, class index, last symbol, length, prefix code
    stack = [(np.eye(D, dtype=np.int64).astype(dtype)[None], np.zeros(1, dtype=np.int64),
              np.full(1, -1), 0, np.zeros(1, dtype=np.int64))]
    enumerated = 1
    while stack:
        M, cls, last, length, pcode = stack.pop()
        # count
        P = M @ G0 if gamma0 else M
        nn = np.einsum("kij,kij->k", P, P)
        ok = np.ones(len(M), dtype=bool)
        if first0 is not None and length > 0:
            ok = spec.transition[last, first0]
        j = np.searchsorted(thr, nn.astype(thr.dtype), side="left") if dtype is np.int64 else \
            np.array([_first_checkpoint(thresholds, int(v)) for v in nn])
        sel = ok & (j < m)
        if sel.any():
            fv = tables[min(length, L)][pcode[sel]]
            np.add.at(counts, (j[sel], cls[sel]), 1)
            np.add.at(weighted, (j[sel], cls[sel]), fv)
        # expand
        kids = []
        for s, g in enumerate(gens):
            allowed = np.ones(len(M), dtype=bool) if length == 0 else spec.transition[last, s]
            if not allowed.any():
                continue
            C = M[allowed] @ g
            if spec.kind == "cf":
                keep = np.einsum("kij,kij->k", C, C) <= bound
            else:
                keep = C[:, -1, -1].astype(float) <= corner_cap
            if not keep.any():
                continue
            cp = pcode[allowed][keep]
            if length < L:
                cp = cp * spec.N + s
            kids.append((C[keep], perms[s][cls[allowed][keep]], np.full(int(keep.sum()), s), cp))
        if not kids:
            continue
        C = np.concatenate([k[0] for k in kids])
        ccls, clast, cp = (np.concatenate([k[i] for k in kids]) for i in (1, 2, 3))
        enumerated += len(C)
        if enumerated > budget:
            ledger.counts = np.cumsum(counts, axis=0)
            ledger.weighted = np.cumsum(weighted, axis=0)
            ledger.enumerated = enumerated
            ledger.partial = True
            raise ResourceError(f"enumeration budget {budget} exceeded", partial=ledger)
        for a in range(0, len(C), CHUNK):
            b = a + CHUNK
            stack.append((C[a:b], ccls[a:b], clast[a:b], length + 1, cp[a:b]))
    ledger.counts = np.cumsum(counts, axis=0)
    ledger.weighted = np.cumsum(weighted, axis=0)
    ledger.enumerated = enumerated
    return ledger


def _first_checkpoint(thresholds, v) -> int:
    for j, t in enumerate(thresholds):
        if v <= t:
            return j
    return len(thresholds)


# ---------------------------------------------------------------- statistics

def exponent_fit(ledger: CountLedger) -> dict:
    """Least-squares fit of log(total) against log(R); the slope estimates 2 delta."""
    tot = np.asarray(ledger.totals, dtype=float)
    R = np.asarray(ledger.radii, dtype=float)
    sel = tot > 0
    if sel.sum() < 5:
        raise DomainError("exponent fit needs at least 5 checkpoints with nonzero totals")
    x, y = np.log(R[sel]), np.log(tot[sel])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = len(x) - 2
    s2 = float(res @ res) / dof if dof > 0 else 0.0
    se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    return {"slope": float(coef[0]), "intercept": float(coef[1]),
            "residual": float(np.sqrt(np.mean(res ** 2))),
            "slope_ci": [float(coef[0] - 2 * se), float(coef[0] + 2 * se)]}


def tv_from_uniform(counts: np.ndarray, classes: int) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0 or classes == 0:
        raise DomainError("empty counts")
    p = counts / total
    # classes outside the support of counts each contribute 1/classes
    missing = classes - np.count_nonzero(counts)
    return 0.5 * (float(np.abs(p[counts > 0] - 1 / classes).sum()) + max(missing, 0) / classes)


def equidistribution_report(ledger: CountLedger) -> dict:
    """Total-variation distance from uniform per checkpoint, over attained classes and over the group."""
    if ledger.totals.sum() == 0:
        raise DomainError("empty ledger")
    if ledger.group_size == 1:
        raise DomainError("equidistribution needs a nontrivial quotient")
    att, full, n_att = [], [], []
    final_support = np.count_nonzero(ledger.counts[-1])
    for j in range(len(ledger.radii)):
        c = ledger.counts[j]
        if c.sum() == 0:
            att.append(None)
            full.append(None)
            n_att.append(0)
            continue
        att.append(tv_from_uniform(c, int(np.count_nonzero(c))))
        full.append(tv_from_uniform(c, ledger.group_size))
        n_att.append(int(np.count_nonzero(c)))
    return {"q": str(ledger.q), "radii": [float(r) for r in ledger.radii], "tv_attained": att,
            "tv_full": full, "attained_classes": n_att, "group_size": ledger.group_size,
            "final_support": int(final_support)}


# ---------------------------------------------------------------- distance conversion

def basepoint_distance(g) -> float:
    """d(o, g o) computed from the image point of o (not from the norm)."""
    if g.setting == SO:
        return math.acosh(max(float(g.m[-1][-1]), 1.0))
    a, b, c, d = (complex(v) if not isinstance(v, GaussianInteger) else complex(v.re, v.im)
                  for v in (g.m[0][0], g.m[0][1], g.m[1][0], g.m[1][1]))
    den = abs(c) ** 2 + abs(d) ** 2
    x = (a * c.conjugate() + b * d.conjugate()) / den
    t = 1 / den
    # cosh d((0,1),(x,t)) = 1 + (|x|^2 + (t-1)^2) / (2t)
    return math.acosh(1 + (abs(x) ** 2 + (t - 1) ** 2) / (2 * t))


def frobenius_distance_check(spec, radii, gamma0: Sequence[int] = (), tol: float = 1e-9,
                             budget: int = DEFAULT_BUDGET) -> dict:
    """Check d(o, g g0 o) - d(o, g0 o) <= 2 log R + log(1 + e^{-2 d0}) + log(1 - e^{-d} / (2 R^2 cosh d0))
    for every enumerated g with ||g g0|| / ||g0|| <= R, at every radius R of the schedule."""
    from .semigroup import enumerate_words

    if spec.setting == SO:
        raise DomainError("the norm/distance identity used here is specific to SL2 settings")
    g0 = word_to_element(tuple(gamma0), spec)
    rsq = _radius_sq(radii)
    n0 = frobenius_norm_sq(g0)
    d0 = basepoint_distance(g0)
    bound = rsq[-1] * n0 * frobenius_norm_sq(g0.inverse())
    checked = violations = 0
    worst = math.inf
    for w, g in enumerate_words(spec, max_norm_sq=bound):
        if gamma0 and w and not spec.admissible_pair(w[-1], gamma0[0]):
            continue
        gg = g @ g0
        nn = frobenius_norm_sq(gg)
        d = basepoint_distance(gg)
        for r2 in rsq:
            if nn > r2 * n0:
                continue
            R2 = float(r2)
            rhs = (math.log(R2) + math.log1p(math.exp(-2 * d0))
                   + math.log1p(-math.exp(-d) / (2 * R2 * math.cosh(d0))))
            slack = rhs - (d - d0)
            worst = min(worst, slack)
            checked += 1
            if slack < -tol * max(1.0, abs(rhs)):
                violations += 1
        if checked > budget:
            raise ResourceError("check budget exceeded", partial={"checked": checked})
    return {"checked": checked, "violations": violations, "min_slack": worst}


# ---------------------------------------------------------------- boundary counts

class GroupSum(dict):
    """Element of the group algebra: group index -> (term count, weight)."""

    def add(self, P: int, w: float, n: int = 1):
        c, ws = self.get(P, (0, []))
        ws.append(w)
        self[P] = (c + n, ws)

    def finalize(self) -> dict:
        return {P: (c, math.fsum(ws)) for P, (c, ws) in sorted(self.items())}


def apply_to_vector(coeffs: dict, phi: np.ndarray, group) -> np.ndarray:
    """sum_P w_P rho(P) phi, with (rho(P) phi)(x) = phi(x P)."""
    out = np.zeros(group.size, dtype=np.result_type(phi, float))
    for P, (_, w) in coeffs.items():
        out += w * phi[group.right_perm(P)]
    return out


def itinerary(spec, u, length: int) -> tuple:
    """First symbols of the T-orbit of u."""
    X = _as_points(spec, u)
    out = []
    for _ in range(length):
        j = int(symbols_of(spec, X)[0])
        if j < 0:
            break
        out.append(j)
        X = apply_points(spec.generators[j].inverse(), X)
    return tuple(out)


def _boundary_coeffs(spec, grp, gidx, r: float, X, itin: tuple, F: TestFunction, order: str):
    """N_q(r, u, .) in coefficient form.  Preimage u'' = g_{i_j} ... g_{i_1} u carries the
    cocycle c^j(u'') = g_{i_1} ... g_{i_j} and tau_j(u'') = -log|(g_{i_j} ... g_{i_1})'(u)|."""
    acc = GroupSum()
    if r < 0:
        return acc.finalize()
    sym0 = itin[0]
    e = grp.identity_index
    if order == "dfs":
        stack = [(X, sym0, e, 0.0, ())]
        while stack:
            Y, sym, P, t, new = stack.pop()
            acc.add(P, F.value(new + itin))
            for i in range(spec.N):
                if not spec.admissible_pair(i, sym):
                    continue
                g = spec.generators[i]
                t2 = t - float(log_derivative_points(g, Y)[0])
                if t2 <= r:
                    stack.append((apply_points(g, Y), i, int(grp.right_perm(gidx[i])[P]), t2,
                                  (i,) + new))
        return acc.finalize()
    # breadth first, vectorised per level
    level = [(X, np.array([sym0]), np.array([e]), np.zeros(1), [()])]
    while level:
        nxt = []
        for Y, syms, Ps, ts, words in level:
            for k in range(len(Ps)):
                acc.add(int(Ps[k]), F.value(words[k] + itin))
            for i in range(spec.N):
                ok = spec.transition[i, syms]
                if not ok.any():
                    continue
                g = spec.generators[i]
                t2 = ts[ok] - log_derivative_points(g, Y[ok])
                keep = t2 <= r
                if not keep.any():
                    continue
                idx = np.flatnonzero(ok)[keep]
                nxt.append((apply_points(g, Y[idx]), np.full(len(idx), i),
                            grp.right_perm(gidx[i])[Ps[idx]], t2[keep],
                            [(i,) + words[k] for k in idx]))
        level = nxt
    return acc.finalize()


def boundary_count(spec, q, r: float, u, phi=None, F: TestFunction | None = None,
                   order: str = "bfs", cap: int = 10_000):
    """N_q(r, u, phi) as a vector over the quotient group (phi defaults to delta_e)."""
    grp = quotient_group(spec, q, cap=cap)
    gidx = generator_indices(spec, grp)
    F = F or TestFunction.constant(1.0)
    X = _as_points(spec, u)
    itin = itinerary(spec, u, max(F.max_len, 1))
    coeffs = _boundary_coeffs(spec, grp, gidx, r, X, itin, F, order)
    if phi is None:
        phi = np.zeros(grp.size)
        phi[grp.identity_index] = 1.0
    return apply_to_vector(coeffs, np.asarray(phi), grp)


@dataclass
class RenewalResult:
    ok: bool
    discrepancy: float
    group_exact: bool
    kind: str

    def __bool__(self) -> bool:
        return self.ok


def compare_sides(lhs: dict, rhs: dict, tol: float = 1e-9) -> tuple[bool, float]:
    """Exact agreement of supports and term counts; weights to a relative tolerance."""
    keys = set(lhs) | set(rhs)
    exact = all(lhs.get(k, (0, 0.0))[0] == rhs.get(k, (0, 0.0))[0] for k in keys)
    disc = 0.0
    for k in keys:
        a, b = lhs.get(k, (0, 0.0))[1], rhs.get(k, (0, 0.0))[1]
        disc = max(disc, abs(a - b) / max(1.0, abs(a), abs(b)))
    return exact, disc


def renewal_sides(spec, q, r: float, u, F: TestFunction | None = None, cap: int = 10_000):
    """Both sides of the boundary renewal equation in coefficient form.

    lhs = N_q(r, u), rhs = sum_{u' in T^{-1} u} c_q(u') N_q(r - tau(u'), u') + f(u) chi(0 <= r).
    c_q(u') = g_i acts on coefficients by left multiplication.
    """
    grp = quotient_group(spec, q, cap=cap)
    gidx = generator_indices(spec, grp)
    F = F or TestFunction.constant(1.0)
    X = _as_points(spec, u)
    L = max(F.max_len, 1)
    itin = itinerary(spec, u, L + 1)
    lhs = _boundary_coeffs(spec, grp, gidx, r, X, itin[:L], F, "bfs")
    acc = GroupSum()
    if r >= 0:
        acc.add(grp.identity_index, F.value(itin[:L]))
    for i in range(spec.N):
        if not spec.admissible_pair(i, itin[0]):
            continue
        g = spec.generators[i]
        tau = -float(log_derivative_points(g, X)[0])
        Y = apply_points(g, X)
        sub = _boundary_coeffs(spec, grp, gidx, r - tau, Y, ((i,) + itin)[:L], F, "bfs")
        left = grp.left_perm(gidx[i])
        for P, (c, w) in sub.items():
            acc.add(int(left[P]), w, c)
    return lhs, acc.finalize(), grp


def renewal_check(spec, q, r: float, u, phi=None, F: TestFunction | None = None,
                  tol: float = 1e-9) -> RenewalResult:
    lhs, rhs, grp = renewal_sides(spec, q, r, u, F)
    exact, disc = compare_sides(lhs, rhs, tol)
    if phi is not None:
        phi = np.asarray(phi)
        a, b = apply_to_vector(lhs, phi, grp), apply_to_vector(rhs, phi, grp)
        disc = max(disc, float(np.max(np.abs(a - b), initial=0.0)) / max(1.0, float(np.max(np.abs(a), initial=0.0))))
    return RenewalResult(exact and disc <= tol, disc, exact, "boundary")


# ---------------------------------------------------------------- N_q^*

def _star_coeffs(spec, grp, gidx, r: float, word0: tuple, F: TestFunction, cap_nodes=10 ** 6):
    """N_q^*(r, gamma0, .) in coefficient form: sum over gamma with
    d(o, gamma gamma0 o) - d(o, gamma0 o) <= r of F(gamma gamma0 o) rho(pi_q(gamma)).

    gamma is grown by prepending letters; pruning uses monotone norms for CF
    specs and the base-point margin for Schottky specs.
    """
    from .groups import hyperbolic_distance

    acc = GroupSum()
    if r < 0:
        return acc.finalize()
    g0 = word_to_element(word0, spec)
    d0 = hyperbolic_distance(g0)
    slack = spec.base_point_margin if spec.kind == "schottky" else 0.0
    stack = [((), g0, grp.identity_index)]
    nodes = 0
    while stack:
        w, g, P = stack.pop()
        dist = hyperbolic_distance(g) - d0
        if dist <= r:
            acc.add(P, F.value(w + word0))
        elif dist > r + slack + 1e-9:
            continue
        first = (w + word0)[0] if (w or word0) else None
        for i in range(spec.N):
            if first is not None and not spec.admissible_pair(i, first):
                continue
            nodes += 1
            if nodes > cap_nodes:
                raise ResourceError("N_q^* traversal exceeded its node cap", partial=None)
            stack.append(((i,) + w, spec.generators[i] @ g, int(grp.left_perm(gidx[i])[P])))
    return acc.finalize()


def star_count(spec, q, r: float, word0: Sequence[int] = (), phi=None, F: TestFunction | None = None,
               cap: int = 10_000):
    grp = quotient_group(spec, q, cap=cap)
    gidx = generator_indices(spec, grp)
    F = F or TestFunction.constant(1.0)
    coeffs = _star_coeffs(spec, grp, gidx, r, tuple(word0), F)
    if phi is None:
        phi = np.zeros(grp.size)
        phi[grp.identity_index] = 1.0
    return apply_to_vector(coeffs, np.asarray(phi), grp)


def star_renewal_sides(spec, q, r: float, word0: Sequence[int] = (), F: TestFunction | None = None,
                       cap: int = 10_000):
    """lhs = N_q^*(r, gamma0); rhs = sum_i N_q^*(r - tau^*_i, g_i gamma0, rho(g_i) .) + F(gamma0 o) chi(0 <= r).

    N_q^*(., ., rho(g_i) phi) = sum_P w_P rho(P g_i) phi, so g_i acts on coefficients from the right.
    """
    from .groups import hyperbolic_distance

    word0 = tuple(word0)
    grp = quotient_group(spec, q, cap=cap)
    gidx = generator_indices(spec, grp)
    F = F or TestFunction.constant(1.0)
    lhs = _star_coeffs(spec, grp, gidx, r, word0, F)
    acc = GroupSum()
    if r >= 0:
        acc.add(grp.identity_index, F.value(word0))
    d0 = hyperbolic_distance(word_to_element(word0, spec))
    for i in range(spec.N):
        if word0 and not spec.admissible_pair(i, word0[0]):
            continue
        w1 = (i,) + word0
        tau = hyperbolic_distance(word_to_element(w1, spec)) - d0
        sub = _star_coeffs(spec, grp, gidx, r - tau, w1, F)
        right = grp.right_perm(gidx[i])
        for P, (c, w) in sub.items():
            acc.add(int(right[P]), w, c)
    return lhs, acc.finalize(), grp


def star_renewal_check(spec, q, r: float, word0: Sequence[int] = (), F: TestFunction | None = None,
                       tol: float = 1e-9) -> RenewalResult:
    lhs, rhs, _ = star_renewal_sides(spec, q, r, word0, F)
    exact, disc = compare_sides(lhs, rhs, tol)
    return RenewalResult(exact and disc <= tol, disc, exact, "ball")


# ---------------------------------------------------------------- Zaremba

def zaremba_sets(alphabet: Sequence, denominator_bound: int, fractions: bool = True):
    """Fractions [a_1, ..., a_k] = b/d with all a_i in the alphabet and N(d) <= bound.

    g_{a_1} ... g_{a_k} = (p_{k-1} b; q_{k-1} d), and N(q_k) never decreases
    along a branch (q_{k-1}/q_k stays in the disk |z - 1/2| <= 1/2), so
    branches are cut at the bound.  Returns (set of (b, d), set of d); Gaussian
    entries are returned as GaussianInteger.
    """
    alph = [GaussianInteger.coerce(a) for a in alphabet]
    if not alph:
        raise DomainError("empty alphabet")
    for a in alph:
        if a.re < 1:
            raise DomainError(f"digit {a} must have real part at least 1")
    if denominator_bound < 1:
        return set(), set()
    gauss = any(a.im for a in alph)
    B = int(denominator_bound)
    # state: p_{k-1}, p_k, q_{k-1}, q_k as (re, im) int64 pairs
    z = np.zeros(1, dtype=np.int64)
    o = np.ones(1, dtype=np.int64)
    # empty product: identity = (p_{-1} p_0; q_{-1} q_0) = (1 0; 0 1)
    state = [(o, z), (z, z), (z, z), (o, z)]
    nums, dens = [], []
    while len(state[0][0]):
        (ppr, ppi), (pr, pi), (qqr, qqi), (qr, qi) = state
        new = [[], [], [], [], [], [], [], []]
        for a in alph:
            # right multiplication by (0 1; 1 a): (x y) -> (y, x + a y)
            npr = ppr + a.re * pr - a.im * pi
            npi = ppi + a.re * pi + a.im * pr
            nqr = qqr + a.re * qr - a.im * qi
            nqi = qqi + a.re * qi + a.im * qr
            keep = nqr * nqr + nqi * nqi <= (B if gauss else B * B)
            if not gauss:
                keep = np.abs(nqr) <= B
            for lst, v in zip(new, (pr, pi, npr, npi, qr, qi, nqr, nqi)):
                lst.append(v[keep])
        state = [(np.concatenate(new[0]), np.concatenate(new[1])),
                 (np.concatenate(new[2]), np.concatenate(new[3])),
                 (np.concatenate(new[4]), np.concatenate(new[5])),
                 (np.concatenate(new[6]), np.concatenate(new[7]))]
        if gauss:
            dens.append(np.stack([state[3][0], state[3][1]], axis=1))
            if fractions:
                nums.append(np.stack([state[1][0], state[1][1], state[3][0], state[3][1]], axis=1))
        else:
            dens.append(state[3][0])
            if fractions:
                nums.append(np.stack([state[1][0], state[3][0]], axis=1))
    if gauss:
        D = {GaussianInteger(int(x), int(y)) for arr in dens for x, y in np.unique(arr, axis=0)} \
            if dens else set()
        Nset = {(GaussianInteger(int(a), int(b)), GaussianInteger(int(c), int(d)))
                for arr in nums for a, b, c, d in np.unique(arr, axis=0)} if fractions else set()
    else:
        D = {int(x) for arr in dens for x in np.unique(arr)}
        Nset = {(int(b), int(d)) for arr in nums for b, d in np.unique(arr, axis=0)} if fractions else set()
    return Nset, D


def zaremba_density(alphabet: Sequence, N: int) -> Fraction:
    """#(D_A intersect [1, N]) / N, exactly."""
    alph = [GaussianInteger.coerce(a) for a in alphabet]
    if any(a.im for a in alph):
        raise DomainError("density on [1, N] needs a real alphabet; use zaremba_sets")
    if N < 1:
        raise DomainError("N must be positive")
    _, D = zaremba_sets([a.re for a in alph], N, fractions=False)
    return Fraction(sum(1 for d in D if 1 <= d <= N), N)
