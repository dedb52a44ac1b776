"""Cylinder discretisation of transfer operators and what is built on it.

Cylinders of operator depth d are the admissible words of length d, coded
in base N with the first symbol most significant.  The anchor of a word C
is x_C = g_{c_0} ... g_{c_{d-1}} (omega(c_{d-1})), so x_{(j) + C} = g_j(x_C)
and T x_{(j) + C} = x_C exactly.  The operator is

    (L_s h)(C) = sum_j |g_j'(x_{C[:-1]})|^s h((j) + C[:-1]),

the weight being e^{-s tau(x_{C'})} for the branch cylinder C' = (j) + C[:-1].
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np
from scipy import optimize, sparse
from scipy.sparse import csgraph

from .errors import DomainError, NumericError
from .groups import SO, apply_points, log_derivative_points
from .semigroup import anchor_point

MAX_POWER_ITER = 100_000


# ---------------------------------------------------------------- cylinder system

@dataclass
class Level:
    codes: np.ndarray      # sorted base-N codes of admissible words of this length
    anchors: np.ndarray    # anchor points
    logw: np.ndarray       # log |g_{c_0}'(x_{C[1:]})| = -tau(x_C)
    birkhoff: np.ndarray   # tau_{m-1}(x_C)
    first: np.ndarray      # first symbol


class CylinderSystem:
    """All admissible words up to a given length, with anchors and branch weights."""

    def __init__(self, spec, depth: int):
        if depth < 1:
            raise DomainError("depth must be at least 1")
        self.spec = spec
        self.depth = depth
        self.N = spec.N
        A = spec.transition
        om = [anchor_point(spec, j) for j in range(self.N)]
        if spec.setting == SO:
            anchors = np.array(om, dtype=float)
        else:
            anchors = np.array(om, dtype=complex)
        first = np.arange(self.N)
        lw = np.array([log_derivative_points(spec.generators[j], anchors[j:j + 1])[0]
                       for j in range(self.N)])
        levels = [Level(np.arange(self.N, dtype=np.int64), anchors, lw, np.zeros(self.N), first)]
        for m in range(1, depth):
            prev = levels[-1]
            codes, anc, logw, birk, fst = [], [], [], [], []
            for j in range(self.N):
                ok = A[j, prev.first]
                if not ok.any():
                    continue
                X = prev.anchors[ok]
                g = spec.generators[j]
                codes.append(j * self.N ** m + prev.codes[ok])
                anc.append(apply_points(g, X))
                w = log_derivative_points(g, X)
                logw.append(w)
                birk.append(prev.birkhoff[ok] - w)
                fst.append(np.full(int(ok.sum()), j))
            levels.append(Level(np.concatenate(codes), np.concatenate(anc), np.concatenate(logw),
                                np.concatenate(birk), np.concatenate(fst)))
        self.levels = levels
        self._structure = None

    @property
    def top(self) -> Level:
        return self.levels[-1]

    @property
    def size(self) -> int:
        return len(self.top.codes)

    def index_of(self, codes: np.ndarray, level: int | None = None):
        lv = self.levels[(level or self.depth) - 1]
        pos = np.searchsorted(lv.codes, codes)
        pos = np.minimum(pos, len(lv.codes) - 1)
        return pos, lv.codes[pos] == codes

    def structure(self) -> sparse.csr_matrix:
        """0/1 matrix S with S[C, C'] = 1 iff C' = (j) + C[:-1] is admissible."""
        if self._structure is None:
            d = self.depth
            top = self.top
            prefix = top.codes // self.N
            rows, cols = [], []
            A = self.spec.transition
            for j in range(self.N):
                cand = j * self.N ** (d - 1) + prefix
                pos, ok = self.index_of(cand)
                ok &= A[j, top.first]
                rows.append(np.flatnonzero(ok))
                cols.append(pos[ok])
            rows, cols = np.concatenate(rows), np.concatenate(cols)
            S = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(self.size, self.size))
            S.sort_indices()
            self._structure = S
        return self._structure

    def words(self, level: int | None = None) -> np.ndarray:
        lv = self.levels[(level or self.depth) - 1]
        m = level or self.depth
        out = np.empty((len(lv.codes), m), dtype=np.int64)
        c = lv.codes.copy()
        for i in range(m - 1, -1, -1):
            out[:, i] = c % self.N
            c //= self.N
        return out


_SYSTEMS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def cylinder_system(spec, depth: int) -> CylinderSystem:
    cache = _SYSTEMS.setdefault(spec, {})
    if depth not in cache:
        cache[depth] = CylinderSystem(spec, depth)
    return cache[depth]


# ---------------------------------------------------------------- operators

@dataclass
class DiscretizedOperator:
    system: CylinderSystem
    s: complex
    weights: np.ndarray     # per branch cylinder C'
    structure: sparse.csr_matrix

    @property
    def depth(self) -> int:
        return self.system.depth

    def matrix(self) -> sparse.csr_matrix:
        return (self.structure @ sparse.diags(self.weights)).tocsr()

    def apply(self, h: np.ndarray) -> np.ndarray:
        if h.ndim == 1:
            return self.structure @ (self.weights * h)
        return self.structure @ (self.weights[:, None] * h)

    def apply_adjoint(self, v: np.ndarray) -> np.ndarray:
        return self.weights * (self.structure.T @ v)


def build_operator(spec, s, depth: int) -> DiscretizedOperator:
    """Depth-d cylinder matrix of the transfer operator with potential -s tau."""
    sysm = cylinder_system(spec, depth)
    w = np.exp(s * sysm.top.logw)
    return DiscretizedOperator(sysm, s, w, sysm.structure())


@dataclass
class RPFData:
    eigenvalue: float
    h: np.ndarray
    nu: np.ndarray
    iterations: int
    ratio_estimate: float   # observed contraction of the power iteration, ~ |lambda_2 / lambda_1|


def _check_irreducible(op: DiscretizedOperator):
    n, _ = csgraph.connected_components(op.structure, directed=True, connection="strong")
    if n != 1:
        raise DomainError("operator is reducible (transition graph not strongly connected)")


def _power(apply, n, x0, tol):
    x = x0 / x0.sum()
    lam_prev = None
    diffs = []
    for it in range(1, MAX_POWER_ITER + 1):
        y = apply(x)
        lam = y.sum() / x.sum()
        x = y / y.sum()
        if lam_prev is not None:
            d = abs(lam - lam_prev)
            diffs.append(d)
            if d <= tol * abs(lam):
                ratio = diffs[-1] / diffs[-2] if len(diffs) >= 2 and diffs[-2] > 0 else 0.0
                return lam, x, it, float(ratio)
        lam_prev = lam
    raise NumericError(f"power iteration did not converge in {MAX_POWER_ITER} iterations")


def leading_eigen(op: DiscretizedOperator, tol: float = 1e-12, h0=None, nu0=None,
                  check: bool = True) -> RPFData:
    """Leading eigenvalue with positive right eigenvector h and probability left eigenvector nu."""
    if np.iscomplexobj(op.weights):
        raise DomainError("leading_eigen needs a real parameter")
    if check:
        _check_irreducible(op)
    n = op.system.size
    lam, h, it1, ratio = _power(op.apply, n, np.ones(n) if h0 is None else h0, tol)
    _, nu, it2, _ = _power(op.apply_adjoint, n, np.ones(n) if nu0 is None else nu0, tol)
    nu = nu / nu.sum()
    h = h / (nu @ h)
    return RPFData(float(lam), h, nu, it1 + it2, ratio)


def pressure(spec, s: float, depth: int, tol: float = 1e-12) -> float:
    return math.log(leading_eigen(build_operator(spec, s, depth), tol).eigenvalue)


def pressure_curve(spec, s_values, depth: int) -> list[float]:
    out, h0 = [], None
    for s in s_values:
        op = build_operator(spec, s, depth)
        r = leading_eigen(op, h0=h0, check=h0 is None)
        h0 = r.h
        out.append(math.log(r.eigenvalue))
    return out


def normalization_residuals(spec, s: float, depth: int) -> tuple[float, float]:
    """Residuals of L~ 1 = 1 and L~* mu = mu for L~ = h^{-1} L h / lambda.

    The fixed measure of the dual is mu = h nu, a probability vector since nu(h) = 1.
    """
    op = build_operator(spec, s, depth)
    r = leading_eigen(op)
    fixed = op.apply(r.h) / (r.eigenvalue * r.h)
    mu = r.h * r.nu
    # (L~* m)(C') = sum_C m(C) W[C, C'] h(C') / (lambda h(C))
    dual = op.apply_adjoint(mu / r.h) * r.h / r.eigenvalue
    return float(np.max(np.abs(fixed - 1))), float(np.max(np.abs(dual - mu)))


# ---------------------------------------------------------------- Bowen

def default_depth(spec) -> int:
    if spec.kind == "cf" and len(spec.alphabet) == 2:
        return 8
    return 6


class _Pressure:
    """Pressure at a fixed depth with warm starts between calls."""

    def __init__(self, spec, depth):
        self.spec, self.depth = spec, depth
        self.h0 = None
        self.checked = False
        self.calls = 0

    def __call__(self, s):
        op = build_operator(self.spec, s, self.depth)
        h0 = self.h0
        r_lam, h, _, _ = _power(op.apply, op.system.size,
                                np.ones(op.system.size) if h0 is None else h0, 1e-13)
        if not self.checked:
            _check_irreducible(op)
            self.checked = True
        self.h0 = h
        self.calls += 1
        return math.log(r_lam)


def bowen_root(spec, depth: int, tol: float = 1e-10, bracket=None) -> float:
    """Zero of s -> pressure(s) at one depth (pressure is strictly decreasing)."""
    P = _Pressure(spec, depth)
    lo, hi = bracket if bracket is not None else (0.0, float(spec.n - 1))
    plo, phi = P(lo), P(hi)
    grow = 0
    while plo * phi > 0:
        grow += 1
        if grow > 20:
            raise NumericError("could not bracket the zero of the pressure")
        width = hi - lo
        if plo < 0:
            lo = max(0.0, lo - width)
            plo = P(lo)
            if lo == 0.0 and plo < 0:
                raise NumericError("pressure is negative at s = 0")
        else:
            hi = hi + width
            phi = P(hi)
    return float(optimize.brentq(P, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def bowen_delta(spec, tol: float = 1e-8, depth: int | None = None) -> dict:
    """delta estimate from two depths with a geometric extrapolation and error estimate."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    d = depth or default_depth(spec)
    d1 = max(1, d - 2)
    delta1 = bowen_root(spec, d1, tol=tol / 10)
    delta2 = bowen_root(spec, d, tol=tol / 10, bracket=(max(0.0, delta1 - 0.05), delta1 + 0.05))
    rho = _contraction(spec, d)
    r = rho ** (d - d1)
    extrap = delta2 + (delta2 - delta1) * r / (1 - r) if r < 1 else delta2
    err = abs(delta2 - delta1) / (1 - r) if r < 1 else abs(delta2 - delta1)
    return {"delta": float(extrap), "delta_depth": float(delta2), "delta_coarse": float(delta1),
            "depths": [d1, d], "error": float(err + tol), "contraction": float(rho)}


def _contraction(spec, depth) -> float:
    """Largest branch derivative |g_j'| over the anchors of an operator level."""
    sysm = cylinder_system(spec, min(depth, 4))
    return float(np.exp(np.max(sysm.top.logw)))


# ---------------------------------------------------------------- Gibbs

def cylinder_masses(nu: np.ndarray, sysm: CylinderSystem, length: int) -> np.ndarray:
    """nu of the cylinders of a shorter word length, aggregated from the top level."""
    top = sysm.top
    lv = sysm.levels[length - 1]
    codes = top.codes // sysm.N ** (sysm.depth - length)
    pos, ok = sysm.index_of(codes, length)
    assert ok.all()
    return np.bincount(pos, weights=nu, minlength=len(lv.codes))


def gibbs_check(spec, delta: float, depth: int) -> dict:
    """min and max of nu(C) / exp(-delta tau_k(x_C)) over word lengths 2..depth."""
    op = build_operator(spec, delta, depth)
    r = leading_eigen(op)
    sysm = op.system
    ratios_min, ratios_max = math.inf, 0.0
    per_length = []
    for m in range(2, depth + 1):
        mass = cylinder_masses(r.nu, sysm, m)
        lv = sysm.levels[m - 1]
        ratio = mass / np.exp(-delta * lv.birkhoff)
        lo, hi = float(ratio.min()), float(ratio.max())
        per_length.append((m, lo, hi))
        ratios_min, ratios_max = min(ratios_min, lo), max(ratios_max, hi)
    return {"c1": ratios_min, "c2": ratios_max, "per_length": per_length,
            "eigenvalue": r.eigenvalue}


# ---------------------------------------------------------------- congruence decay

def _fit_decay(norms: np.ndarray, floor: float = 1e-12) -> float | None:
    """Minus the log-linear slope over the second half of the iterates above round-off."""
    above = np.flatnonzero(norms <= floor)
    n = int(above[0]) if len(above) else len(norms)
    if n < 3:
        return None
    k = np.arange(n)
    half = n // 2
    slope = np.polyfit(k[half:], np.log(norms[half:n]), 1)[0]
    return float(-slope)


def congruence_decay_probe(spec, q, xi: complex = 0.0, k_max: int = 20, trials: int = 4,
                           seed: int = 0, depth: int | None = None, cap: int = 10_000,
                           delta: float | None = None) -> dict:
    """Decay of iterates of the normalised congruence operator on mean-zero inputs."""
    from .congruence import generator_indices, quotient_group

    grp = quotient_group(spec, q, cap=cap)
    depth = depth or min(default_depth(spec), 6)
    sysm = cylinder_system(spec, depth)
    if delta is None:
        delta = bowen_root(spec, depth)
    xi = complex(xi)
    a, b = xi.real, xi.imag
    real_op = build_operator(spec, delta + a, depth)
    rpf = leading_eigen(real_op)
    w = np.exp((delta + a + 1j * b) * sysm.top.logw) if b else real_op.weights
    # normalised weights: w(C') h(C') / (lambda h(C)) -- the 1/h(C) factor is applied per row
    wn = w * rpf.h / rpf.eigenvalue
    inv_h = 1.0 / rpf.h
    S = real_op.structure
    gidx = generator_indices(spec, grp)
    perms = np.stack([grp.right_perm(g) for g in gidx])      # (N, |G|)
    row_perm = perms[sysm.top.first]                           # (ncyl, |G|)
    rows = np.arange(sysm.size)[:, None]

    def step(H):
        Hp = H[rows, row_perm]                                 # H[C', x g_{C'_0}]
        return inv_h[:, None] * (S @ (wn[:, None] * Hp))

    def run(H):
        norms = [float(np.max(np.abs(H)))]
        for _ in range(k_max):
            H = step(H)
            norms.append(float(np.max(np.abs(H))))
        return np.array(norms)

    G = grp.size
    logs = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        H = rng.uniform(-1, 1, size=(sysm.size, G))
        if b:
            H = H + 1j * rng.uniform(-1, 1, size=H.shape)
        H = H - H.mean(axis=1, keepdims=True)
        logs.append(run(H))
    norms = np.mean(np.array(logs), axis=0)
    rng = np.random.default_rng([seed, trials])
    f = rng.uniform(0.5, 1.5, size=sysm.size)
    control = run(np.repeat(f[:, None], G, axis=1).astype(complex if b else float))
    eta = _fit_decay(norms / norms[0]) if norms[0] > 0 else None
    ceta = _fit_decay(control / control[0])
    return {"q": str(q), "group_size": G, "xi": [a, b], "depth": depth, "delta": float(delta),
            "eta": eta, "norms": norms.tolist(), "control_norms": control.tolist(),
            "control_eta": ceta, "trials": trials}
