"""Reduction mod q, finite quotient groups, return trajectories and Cayley gaps."""
from __future__ import annotations

import itertools
import math
import weakref
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arithmetic import GaussianInteger, _gauss_canonical, norm, reduce
from .errors import DomainError, ResourceError
from .groups import SL2C, SO, GroupElement, fixed_points, is_hyperbolic
from .semigroup import g_letter, word_to_element, words_of_length

DEFAULT_GROUP_CAP = 10_000
DEFAULT_EIG_CAP = 2_000


def _modulus_for(g: GroupElement, q):
    if g.setting == SL2C and not isinstance(q, GaussianInteger):
        return GaussianInteger(int(q))
    return q


def _key_entry(v):
    if isinstance(v, GaussianInteger):
        return (v.re, v.im)
    return v


def _from_key_entry(v):
    if isinstance(v, tuple):
        return GaussianInteger(*v)
    return v


def project(g: GroupElement, q) -> tuple:
    """Entrywise canonical residues of g, as a hashable row-major key."""
    if not g.exact:
        raise DomainError("only exact elements can be reduced")
    norm(q)
    mod = _modulus_for(g, q)
    return tuple(_key_entry(reduce(v, mod)) for v in g.entries)


@dataclass
class QuotientGroup:
    """Finite group of residue matrices generated by the images of some elements."""

    modulus: object
    size_n: int  # matrix size
    keys: list
    index: dict
    gaussian: bool
    _perm_cache: dict = field(default_factory=dict, repr=False)
    _inv: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.keys)

    @property
    def identity_index(self) -> int:
        return 0

    def _canon(self, re: int, im: int) -> tuple:
        cache = self._perm_cache.setdefault("canon", {})
        r = cache.get((re, im))
        if r is None:
            r = cache[(re, im)] = _gauss_canonical(re, im, self.modulus)
        return r

    def _mul_keys(self, a: tuple, b: tuple) -> tuple:
        n = self.size_n
        out = []
        if self.gaussian:
            for i in range(n):
                for j in range(n):
                    re = im = 0
                    for k in range(n):
                        x, y = a[i * n + k], b[k * n + j]
                        re += x[0] * y[0] - x[1] * y[1]
                        im += x[0] * y[1] + x[1] * y[0]
                    out.append(self._canon(re, im))
            return tuple(out)
        m = abs(int(self.modulus))
        for i in range(n):
            for j in range(n):
                out.append(sum(a[i * n + k] * b[k * n + j] for k in range(n)) % m)
        return tuple(out)

    def multiply(self, i: int, j: int) -> int:
        return self.index[self._mul_keys(self.keys[i], self.keys[j])]

    def index_of(self, g: GroupElement) -> int:
        k = project(g, self.modulus)
        try:
            return self.index[k]
        except KeyError:
            raise DomainError("element is not in the quotient group") from None

    def right_perm(self, h: int) -> np.ndarray:
        """perm[x] = index(x * h)."""
        if h not in self._perm_cache:
            hk = self.keys[h]
            self._perm_cache[h] = np.array([self.index[self._mul_keys(k, hk)] for k in self.keys],
                                           dtype=np.int64)
        return self._perm_cache[h]

    def left_perm(self, h: int) -> np.ndarray:
        """perm[x] = index(h * x)."""
        key = ("L", h)
        if key not in self._perm_cache:
            hk = self.keys[h]
            self._perm_cache[key] = np.array([self.index[self._mul_keys(hk, k)] for k in self.keys],
                                             dtype=np.int64)
        return self._perm_cache[key]

    def inverse_index(self, i: int) -> int:
        if self._inv is None:
            inv = np.empty(self.size, dtype=np.int64)
            for a in range(self.size):
                inv[a] = -1
            # x * h = e  <=>  x = h^-1; read it off one right permutation per element
            for h in range(self.size):
                p = self.right_perm(h)
                inv[h] = int(np.flatnonzero(p == 0)[0])
            self._inv = inv
        return int(self._inv[i])


def _identity_key(n: int, gaussian: bool) -> tuple:
    one, zero = ((1, 0), (0, 0)) if gaussian else (1, 0)
    return tuple(one if i == j else zero for i in range(n) for j in range(n))


def group_from_elements(elements: Sequence[GroupElement], q, cap: int = DEFAULT_GROUP_CAP) -> QuotientGroup:
    """BFS closure of the images of ``elements`` and their inverses."""
    if not elements:
        raise DomainError("need at least one generator")
    n = len(elements[0].m)
    gaussian = any(g.setting == SL2C for g in elements)
    mod = GaussianInteger.coerce(q) if gaussian and not isinstance(q, GaussianInteger) else q
    norm(mod)
    if gaussian:
        elements = [GroupElement(SL2C, g.m) if g.setting != SL2C else g for g in elements]
    gens = []
    for g in list(elements) + [g.inverse() for g in elements]:
        k = project(g, mod)
        if k not in gens:
            gens.append(k)
    e = tuple(_key_entry(reduce(_from_key_entry(v), mod)) for v in _identity_key(n, gaussian))
    grp = QuotientGroup(mod, n, [e], {e: 0}, gaussian)
    if norm(mod) == 1:
        return grp
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = grp._mul_keys(x, s)
            if y not in grp.index:
                if len(grp.keys) >= cap:
                    raise ResourceError(f"quotient group exceeds {cap} elements",
                                        partial={"elements_found": len(grp.keys)})
                grp.index[y] = len(grp.keys)
                grp.keys.append(y)
                queue.append(y)
    return grp


_GROUPS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def quotient_group(spec, q, cap: int = DEFAULT_GROUP_CAP) -> QuotientGroup:
    """Image of the semigroup's generators mod q, closed under products and inverses.

    Cached per spec; permutation tables built on one call are reused by later ones.
    """
    try:
        per_spec = _GROUPS.setdefault(spec, {})
    except TypeError:
        return group_from_elements(spec.generators, q, cap)
    key = (str(q), cap)
    if key not in per_spec:
        per_spec[key] = group_from_elements(spec.generators, q, cap)
    return per_spec[key]


def generator_indices(spec, group: QuotientGroup) -> list[int]:
    return [group.index_of(g) for g in spec.generators]


# ---------------------------------------------------------------- return trajectories

def _continuations(spec, p: int, y: int, z: int) -> list[tuple]:
    """Words (a_1, ..., a_p) with (y, a_p, ..., a_1, z) admissible."""
    if not (0 <= y < spec.N and 0 <= z < spec.N):
        raise DomainError("y and z must be symbols")
    out = []
    for w in words_of_length(spec, p):
        if spec.admissible_pair(y, w[-1]) and spec.admissible_pair(w[0], z):
            out.append(w)
    return out


def return_trajectory_products(spec, p: int, y: int, z: int) -> list[GroupElement]:
    """All products g(alpha) g(alpha~)^{-1}, with repetitions, in a fixed order."""
    if p < 1:
        raise DomainError("p must be at least 1")
    words = _continuations(spec, p, y, z)
    if not words:
        raise DomainError(f"no admissible continuation between {y} and {z}")
    elems = [word_to_element(w, spec) for w in words]
    return [a @ b.inverse() for a in elems for b in elems]


def return_trajectory_set(spec, p: int, y: int, z: int) -> list[GroupElement]:
    """The set S^p(y, z), deduplicated, first-occurrence order."""
    seen, out = set(), []
    for g in return_trajectory_products(spec, p, y, z):
        if g not in seen:
            seen.add(g)
            out.append(g)
    return out


# ---------------------------------------------------------------- Cayley graphs

@dataclass
class CyclicGroup:
    """Z/n with the same interface as QuotientGroup (for controls)."""

    n: int

    @property
    def size(self) -> int:
        return self.n

    @property
    def identity_index(self) -> int:
        return 0

    def right_perm(self, h: int) -> np.ndarray:
        return (np.arange(self.n) + h) % self.n

    left_perm = right_perm  # abelian

    def inverse_index(self, i: int) -> int:
        return (-i) % self.n


def averaging_operator(group, S: Sequence[int]) -> np.ndarray:
    """(1/|S|) sum_h P_h with (P_h phi)(g) = phi(g h^{-1})."""
    S = sorted(set(int(s) for s in S))
    if not S:
        raise DomainError("generator set is empty")
    m = group.size
    A = np.zeros((m, m))
    rows = np.arange(m)
    for h in S:
        A[rows, group.right_perm(group.inverse_index(h))] += 1.0
    return A / len(S)


def cayley_gap(group, S: Sequence[int], cap: int = DEFAULT_EIG_CAP) -> dict:
    """Second-smallest eigenvalue of I - averaging operator."""
    if group.size > cap:
        raise ResourceError(f"group of size {group.size} exceeds the eigensolve cap {cap}")
    A = averaging_operator(group, S)
    L = np.eye(group.size) - A
    sym = np.allclose(L, L.T, atol=1e-14)
    if sym:
        w, v = np.linalg.eigh(L)
    else:
        w, v = np.linalg.eig(L)
        order = np.argsort(w.real)
        w, v = w[order].real, v[:, order].real
    lam1 = float(w[0])
    const_residual = float(np.max(np.abs(L @ np.ones(group.size))))
    lam2 = float(w[1]) if group.size > 1 else float("nan")
    return {"lambda1": lam1, "lambda2": lam2, "constant_residual": const_residual,
            "size": group.size, "generators": len(set(S)), "symmetric": sym}


# ---------------------------------------------------------------- sphere test

def _as_real_rows(points) -> np.ndarray:
    P = np.asarray(points)
    if np.iscomplexobj(P):
        P = np.column_stack([P.real, P.imag]) if P.ndim == 1 else P
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    return P


def sphere_containment_test(points, dim: int | None = None, tol: float = 1e-9) -> bool:
    """True iff the points lie on a common sphere or hyperplane of R^d."""
    P = _as_real_rows(points)
    d = P.shape[1] if dim is None else dim
    if P.shape[1] < d:
        P = np.column_stack([P, np.zeros((len(P), d - P.shape[1]))])
    if len(P) < d + 2:
        raise DomainError(f"need at least {d + 2} points in R^{d}")
    P = P - P.mean(axis=0)
    scale = np.max(np.linalg.norm(P, axis=1))
    if scale == 0:
        return True
    P = P / scale
    M = np.column_stack([np.ones(len(P)), P, np.sum(P * P, axis=1)])
    sv = np.linalg.svd(M, compute_uv=False)
    return bool(sv[-1] / sv[0] < tol)


def _boundary_dim(spec) -> int:
    return spec.n - 1


def zariski_density_probe(spec, p: int, y: int, z: int, max_points: int = 200) -> dict:
    """Fixed points of hyperbolic products of S^p(y, z) of length <= 3, then the sphere test."""
    S = return_trajectory_set(spec, p, y, z)
    d = _boundary_dim(spec)
    pts, keys = [], set()
    done = False
    for length in (1, 2, 3):
        for combo in itertools.product(range(len(S)), repeat=length):
            g = S[combo[0]]
            for i in combo[1:]:
                g = g @ S[i]
            if not is_hyperbolic(g):
                continue
            x = fixed_points(g)[0]
            if x is None or (not isinstance(x, tuple) and not np.isfinite(complex(x))):
                continue
            row = tuple(np.round(_as_real_rows([x] if not isinstance(x, tuple) else [x])[0], 12))
            if row in keys:
                continue
            keys.add(row)
            pts.append(row)
            if len(pts) >= max_points:
                done = True
                break
        if done:
            break
    report = {"p": p, "y": y, "z": z, "set_size": len(S), "fixed_points": len(pts)}
    if len(pts) < d + 2:
        report.update(status="inconclusive", contained=None)
        return report
    contained = sphere_containment_test(np.array(pts), dim=d)
    report.update(status="contained" if contained else "density witnessed", contained=contained)
    return report


# ---------------------------------------------------------------- trace field

def _tr(g: GroupElement) -> GaussianInteger:
    return GaussianInteger.coerce(g.trace())


def _is_real(x) -> bool:
    return GaussianInteger.coerce(x).im == 0


def case_elements(a, b) -> dict:
    """The four witness elements and their closed-form traces."""
    ga = lambda x, y: g_letter(x) @ g_letter(y)  # noqa: E731
    gaa, gbb, gab, gba = ga(a, a), ga(b, b), ga(a, b), ga(b, a)
    A, B = GaussianInteger.coerce(a), GaussianInteger.coerce(b)
    forms = case_closed_forms(A, B)
    return {
        "case1": ((gaa, gbb, 1), forms["case1"]),
        "case2": ((gaa, gbb, 2), forms["case2"]),
        "case3": ((gab, gba, 2), forms["case3"]),
        "case4": ((gaa, gba, 2), forms["case4"]),
    }


def _gm(x, y):
    """Product of 2x2 matrices over Z[i] stored as 8-tuples of ints (re, im per entry)."""
    a, b, c, d = ((x[i], x[i + 1]) for i in range(0, 8, 2))
    e, f, g, h = ((y[i], y[i + 1]) for i in range(0, 8, 2))

    def mul_add(p, q, r, s):
        return (p[0] * q[0] - p[1] * q[1] + r[0] * s[0] - r[1] * s[1],
                p[0] * q[1] + p[1] * q[0] + r[0] * s[1] + r[1] * s[0])

    return mul_add(a, e, b, g) + mul_add(a, f, b, h) + mul_add(c, e, d, g) + mul_add(c, f, d, h)


def _block(A: GaussianInteger, B: GaussianInteger):
    # (0 1; 1 A)(0 1; 1 B) = (1 B; A 1 + A B)
    AB = A * B
    return (1, 0, B.re, B.im, A.re, A.im, 1 + AB.re, AB.im)


def _inv_block(x):
    a, b, c, d = x[0:2], x[2:4], x[4:6], x[6:8]
    return d + (-b[0], -b[1]) + (-c[0], -c[1]) + a


def case_traces_match(a, b) -> bool:
    """Closed forms equal the exact matrix-product traces for every case."""
    A, B = GaussianInteger.coerce(a), GaussianInteger.coerce(b)
    blocks = {"aa": _block(A, A), "bb": _block(B, B), "ab": _block(A, B), "ba": _block(B, A)}
    shapes = {"case1": ("aa", "bb", 1), "case2": ("aa", "bb", 2), "case3": ("ab", "ba", 2),
              "case4": ("aa", "ba", 2)}
    forms = case_closed_forms(A, B)
    for case, (xs, ys, k) in shapes.items():
        x, y = blocks[xs], _inv_block(blocks[ys])
        g = x if k == 1 else _gm(x, x)
        h = y if k == 1 else _gm(y, y)
        p = _gm(g, h)
        if GaussianInteger(p[0] + p[6], p[1] + p[7]) != forms[case]:
            return False
    return True


def case_closed_forms(A: GaussianInteger, B: GaussianInteger) -> dict:
    d2 = (A - B) ** 2
    ab = A * B
    return {
        "case1": d2 + 2,
        "case2": d2 * d2 + (ab * ab + 4) * d2 + 2,
        "case3": -((ab * ab) + ab * 4 + 4) * d2 + 2,
        "case4": A ** 3 * B * 2 - A ** 4 - ab * ab + 2,
    }


def _which_case(a, b) -> str | None:
    A, B = GaussianInteger.coerce(a), GaussianInteger.coerce(b)
    d2, ab = (A - B) ** 2, A * B
    if not _is_real(d2):
        return "case1"
    if not _is_real(ab * ab):
        return "case2"
    if not _is_real(ab):
        return "case3"
    if not _is_real(A ** 3 * B * 2 - A ** 4):
        return "case4"
    return None


def trace_field_witness(spec, p: int, y: int, z: int) -> dict:
    """An element of S^p(y, z) (or a short product of them) with non-real trace."""
    if spec.kind != "cf" or spec.real:
        raise DomainError("trace witnesses need a continued-fractions alphabet with a non-real letter")
    if p < 1:
        raise DomainError("p must be at least 1")
    alph = list(spec.alphabet)
    pairs = [(a, b) for a, b in itertools.permutations(alph, 2)
             if not (_is_real(a) and _is_real(b))]
    letter_index = {lt: i for i, lt in enumerate(spec.letters)}
    needed = None
    for a, b in pairs:
        case = _which_case(a, b)
        if case is None:
            continue
        (x, yel, k), formula = case_elements(a, b)[case]
        if k > p:
            needed = k if needed is None else min(needed, k)
            continue
        # pad both excursions with a common prefix: conjugation keeps the trace
        sx = {"case1": (a, a), "case2": (a, a), "case3": (a, b), "case4": (a, a)}[case]
        sy = {"case1": (b, b), "case2": (b, b), "case3": (b, a), "case4": (b, a)}[case]
        core_a = (letter_index[sx],) * k
        core_b = (letter_index[sy],) * k
        for prefix in words_of_length(spec, p - k):
            wa, wb = prefix + core_a, prefix + core_b
            if (spec.admissible_pair(y, wa[-1]) and spec.admissible_pair(y, wb[-1])
                    and spec.admissible_pair(wa[0], z) and spec.admissible_pair(wb[0], z)):
                g = word_to_element(wa, spec) @ word_to_element(wb, spec).inverse()
                t = _tr(g)
                if t != formula:
                    raise AssertionError("closed-form trace disagrees with the matrix product")
                return {"element": g, "trace": t, "case": case, "a": a, "b": b,
                        "words": (wa, wb), "formula_checked": True}
    # p too small for the matched case: search short products inside the group
    S = return_trajectory_set(spec, p, y, z)
    for length in (1, 2, 3):
        for combo in itertools.product(range(len(S)), repeat=length):
            g = S[combo[0]]
            for i in combo[1:]:
                g = g @ S[i]
            t = _tr(g)
            if t.im != 0:
                return {"element": g, "trace": t, "case": "search", "a": None, "b": None,
                        "words": combo, "formula_checked": False}
    hint = f"; the closed-form witness for this alphabet needs p >= {needed}" if needed else ""
    raise DomainError("no element with non-real trace among products of up to 3 elements of "
                      f"S^{p}({y}, {z}){hint}")


# ---------------------------------------------------------------- expander reports

def expander_report(spec, q, p: int, y: int, z: int, cap: int = DEFAULT_GROUP_CAP,
                    eig_cap: int = DEFAULT_EIG_CAP) -> dict:
    """Cayley gap of the group generated by pi_q(S^p(y, z)), with the full-group control."""
    S = return_trajectory_set(spec, p, y, z)
    grp = group_from_elements(S, q, cap)
    idx = sorted({grp.index_of(g) for g in S})
    gap = cayley_gap(grp, idx, eig_cap)
    full = cayley_gap(grp, range(grp.size), eig_cap) if grp.size > 1 else None
    return {"q": str(q), "p": p, "y": y, "z": z, "set_size": len(S), "image_size": len(idx),
            "group_size": grp.size, "lambda2": gap["lambda2"], "constant_residual": gap["constant_residual"],
            "full_group_lambda2": None if full is None else full["lambda2"]}


def cycle_control(n: int) -> dict:
    """Cycle graph Z/n with S = {+-1}: measured and closed-form lambda_2."""
    gap = cayley_gap(CyclicGroup(n), [1, n - 1])
    return {"n": n, "lambda2": gap["lambda2"], "expected": 1 - math.cos(2 * math.pi / n)}
