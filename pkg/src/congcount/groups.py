"""Matrix group elements for the two settings and their boundary actions.

Three setting tags are used:

* ``SL2R``: 2x2 real matrices (integer when exact) acting on R by Moebius maps.
* ``SL2C``: 2x2 matrices over Z[i] (or complex floats) acting on the Riemann sphere.
* ``SO``:   (n+1)x(n+1) integer matrices preserving x_1^2 + ... + x_n^2 - x_{n+1}^2,
  acting conformally on R^{n-1} u {oo} through the null cone.

Boundary points are ``INF`` or a finite value: a number (int, Fraction,
float, complex) for the SL2 settings, a tuple of coordinates for SO.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import Sequence

import numpy as np

from .arithmetic import GaussianInteger
from .errors import DomainError

SL2R = "SL2R"
SL2C = "SL2C"
SO = "SO"
SETTINGS = (SL2R, SL2C, SO)


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_infinity, ())


INF = _Infinity()


def _infinity():
    return INF


def is_inf(x) -> bool:
    return x is INF


def _is_exact(v) -> bool:
    return isinstance(v, (int, np.integer, Fraction, GaussianInteger))


def _to_complex(v) -> complex:
    if isinstance(v, GaussianInteger):
        return complex(v.re, v.im)
    return complex(v)


def _abs2(v):
    """|v|^2, exact for integers and Gaussian integers."""
    if isinstance(v, GaussianInteger):
        return v.norm()
    if isinstance(v, (int, np.integer, Fraction)):
        return v * v
    return abs(v) ** 2


def _mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(1, m)), a[i][0] * b[0][j]) for j in range(p))
        for i in range(n)
    )


def _clean_entry(v, setting):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.complexfloating):
        v = complex(v)
    if setting == SL2C and isinstance(v, (int, tuple, list)):
        return GaussianInteger.coerce(v)
    if setting == SL2C and isinstance(v, complex) and v.real.is_integer() and v.imag.is_integer():
        return GaussianInteger(int(v.real), int(v.imag))
    return v


def so_form(n: int) -> np.ndarray:
    q = np.eye(n + 1, dtype=np.int64)
    q[n, n] = -1
    return q


@dataclass(frozen=True)
class GroupElement:
    setting: str
    m: tuple
    _inv: object = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise DomainError(f"unknown setting {self.setting!r}")
        rows = tuple(tuple(_clean_entry(v, self.setting) for v in row) for row in self.m)
        if self.setting == SL2C and any(isinstance(v, (float, complex)) for r in self.m for v in r):
            # a float matrix stays a float matrix
            rows = tuple(tuple(_to_complex(v) for v in row) for row in rows)
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise DomainError("matrix must be square")
        if self.setting in (SL2R, SL2C) and size != 2:
            raise DomainError("SL2 elements are 2x2")
        if self.setting == SO and size < 3:
            raise DomainError("SO(n,1) elements need n >= 2")
        object.__setattr__(self, "m", rows)
        self._check()

    def _check(self):
        if self.setting == SO:
            if not self.exact:
                raise DomainError("SO elements must be integral")
            a = np.array(self.m, dtype=object)
            q = so_form(self.n).astype(object)
            if not (a.T.dot(q).dot(a) == q).all():
                raise DomainError("matrix does not preserve the quadratic form")
            if a[self.n, self.n] < 1:
                raise DomainError("element does not preserve the upper sheet")
            return
        # det -1 is allowed: the single-letter maps (0 1; 1 a) have it,
        # while every semigroup generator (a two-letter block) has det 1
        (a, b), (c, d) = self.m
        det = a * d - b * c
        if self.exact:
            if det != 1 and det != -1:
                raise DomainError(f"determinant {det} is not +-1")
        elif min(abs(_to_complex(det) - 1), abs(_to_complex(det) + 1)) > 1e-9:
            raise DomainError("determinant differs from +-1")
        if self.setting == SL2R and any(isinstance(v, (complex, GaussianInteger)) for r in self.m for v in r):
            raise DomainError("SL2R entries must be real")

    # -- constructors
    @classmethod
    def sl2(cls, a, b, c, d) -> "GroupElement":
        vals = (a, b, c, d)
        gauss = any(isinstance(v, (GaussianInteger, complex)) and not (
            isinstance(v, GaussianInteger) and v.im == 0) for v in vals)
        gauss = gauss or any(isinstance(v, complex) and v.imag != 0 for v in vals)
        setting = SL2C if gauss else SL2R
        if not gauss:
            a, b, c, d = (v.re if isinstance(v, GaussianInteger) else v for v in vals)
        return cls(setting, ((a, b), (c, d)))

    @classmethod
    def identity(cls, setting: str, n: int = 2) -> "GroupElement":
        if setting == SO:
            return cls(SO, tuple(tuple(int(i == j) for j in range(n + 1)) for i in range(n + 1)))
        one, zero = (GaussianInteger(1), GaussianInteger(0)) if setting == SL2C else (1, 0)
        return cls(setting, ((one, zero), (zero, one)))

    # -- basic data
    @property
    def n(self) -> int:
        """Dimension of the hyperbolic space acted on."""
        if self.setting == SO:
            return len(self.m) - 1
        return 2 if self.setting == SL2R else 3

    @property
    def exact(self) -> bool:
        return all(_is_exact(v) for r in self.m for v in r)

    @property
    def entries(self) -> tuple:
        return tuple(v for r in self.m for v in r)

    def as_array(self, dtype=None) -> np.ndarray:
        if self.setting == SL2C:
            return np.array([[_to_complex(v) for v in r] for r in self.m], dtype=dtype or complex)
        return np.array([[float(v) if not isinstance(v, int) else v for v in r] for r in self.m],
                        dtype=dtype or float)

    def _same(self, other: "GroupElement"):
        if not isinstance(other, GroupElement):
            raise TypeError("expected a GroupElement")
        if other.setting != self.setting and {self.setting, other.setting} != {SL2R, SL2C}:
            raise DomainError(f"mixed settings {self.setting} and {other.setting}")
        if self.setting == SO and len(self.m) != len(other.m):
            raise DomainError("SO elements of different dimension")

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        self._same(other)
        setting = SL2C if SL2C in (self.setting, other.setting) else self.setting
        return GroupElement(setting, _mat_mul(self.m, other.m))

    __mul__ = __matmul__

    def inverse(self) -> "GroupElement":
        if self._inv is not None:
            return self._inv
        if self.setting == SO:
            q = so_form(self.n).astype(object)
            a = np.array(self.m, dtype=object)
            inv = q.dot(a.T).dot(q)
            out = GroupElement(SO, tuple(tuple(int(v) for v in r) for r in inv))
        else:
            (a, b), (c, d) = self.m
            if self.det == 1:
                out = GroupElement(self.setting, ((d, -b), (-c, a)))
            else:
                out = GroupElement(self.setting, ((-d, b), (c, -a)))
        object.__setattr__(self, "_inv", out)
        object.__setattr__(out, "_inv", self)
        return out

    def __pow__(self, k: int) -> "GroupElement":
        base = self if k >= 0 else self.inverse()
        out = GroupElement.identity(self.setting, self.n)
        k = abs(k)
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    @property
    def det(self):
        if self.setting == SO:
            return 1
        (a, b), (c, d) = self.m
        det = a * d - b * c
        if self.exact:
            return 1 if det == 1 else -1
        return 1 if abs(_to_complex(det) - 1) < 1e-6 else -1

    def trace(self):
        return sum((self.m[i][i] for i in range(1, len(self.m))), self.m[0][0])

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.setting == other.setting and self.m == other.m

    def __hash__(self):
        return hash((self.setting, self.m))

    def __repr__(self):
        rows = "; ".join(" ".join(str(v) for v in r) for r in self.m)
        return f"GroupElement({self.setting}, ({rows}))"

    def to_json(self):
        def enc(v):
            if isinstance(v, GaussianInteger):
                return [v.re, v.im]
            if isinstance(v, Fraction):
                return str(v)
            return v
        return [[enc(v) for v in r] for r in self.m]


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    return g @ h


def inverse(g: GroupElement) -> GroupElement:
    return g.inverse()


def frobenius_norm_sq(g: GroupElement):
    """Sum of |entry|^2; an exact integer for integral elements."""
    return sum((_abs2(v) for v in g.entries), 0)


# ------------------------------------------------------------ hyperbolicity

def is_hyperbolic(g: GroupElement) -> bool:
    if g.setting == SO:
        ev = np.linalg.eigvals(g.as_array())
        return float(np.max(np.abs(ev))) > 1 + 1e-9
    if g.det == -1:
        return is_hyperbolic(g @ g)
    t = g.trace()
    if isinstance(t, GaussianInteger):
        return not (t.im == 0 and abs(t.re) <= 2)
    if isinstance(t, (int, Fraction)):
        return abs(t) > 2
    t = complex(t)
    return not (abs(t.imag) < 1e-12 and abs(t.real) <= 2 + 1e-12)


def _require_hyperbolic(g):
    if not is_hyperbolic(g):
        raise DomainError(f"{g} is not hyperbolic")


def complex_translation_length(g: GroupElement) -> tuple[float, float]:
    """(l, theta) with cosh((l + i theta)/2) = tr(g)/2 and l > 0."""
    if g.setting == SO:
        raise DomainError("complex translation length is defined for SL2 elements only")
    if g.det != 1:
        raise DomainError("complex translation length needs det 1 (use g^2)")
    _require_hyperbolic(g)
    w = cmath.acosh(_to_complex(g.trace()) / 2)
    if w.real < 0:
        w = -w
    return 2 * w.real, 2 * w.imag


def translation_length(g: GroupElement) -> float:
    if g.setting == SO:
        _require_hyperbolic(g)
        return float(math.log(np.max(np.abs(np.linalg.eigvals(g.as_array())))))
    if g.det != 1:
        return complex_translation_length(g @ g)[0] / 2
    return complex_translation_length(g)[0]


def product_translation_rhs(l_g: float, l_h: float, Q) -> complex:
    """cosh((l + i theta)(gh)/2) up to sign, for g = diag(e^{l_g/2}, e^{-l_g/2})
    and h = Q diag(e^{l_h/2}, e^{-l_h/2}) Q^{-1} with det Q = 1."""
    (a, b), (c, d) = (tuple(_to_complex(v) for v in row) for row in (Q.m if isinstance(Q, GroupElement) else Q))
    s, t = l_g / 2, l_h / 2
    return math.cosh(s) * math.cosh(t) + (a * d + b * c) * math.sinh(s) * math.sinh(t)


def _acosh_exact(x) -> float:
    """arccosh of a (possibly huge) integer or rational >= 1."""
    if x < 1:
        if x > 1 - 1e-12:
            return 0.0
        raise DomainError("arccosh argument below 1")
    if x < 1e8:
        return math.acosh(float(x))
    # log(x + sqrt(x^2 - 1)) = log(2x) - 1/(4x^2) - ...
    if isinstance(x, Fraction):
        lx = math.log(x.numerator) - math.log(x.denominator)
    else:
        lx = math.log(x)
    return math.log(2) + lx - 0.25 / float(x) ** 2


def hyperbolic_distance(g: GroupElement) -> float:
    """d(o, g o) for the standard base point o."""
    if g.setting == SO:
        return _acosh_exact(g.m[g.n][g.n])
    x = frobenius_norm_sq(g)
    if isinstance(x, float):
        return math.acosh(max(x / 2, 1.0))
    return _acosh_exact(Fraction(x, 2))


# ------------------------------------------------------------ boundary action

def null_vector(x, n: int):
    """Lift of a boundary point of R^{n-1} to the light cone."""
    if x is INF:
        return (0,) * (n - 1) + (-1, 1)
    x = tuple(x)
    if len(x) != n - 1:
        raise DomainError(f"boundary point must have {n - 1} coordinates")
    s = sum(v * v for v in x)
    return tuple(2 * v for v in x) + (1 - s, 1 + s)


def from_null_vector(w, n: int):
    den = w[n - 1] + w[n]
    if den == 0 or (isinstance(den, float) and abs(den) < 1e-300):
        return INF
    if all(_is_exact(v) for v in w):
        return tuple(Fraction(v) / den for v in w[: n - 1])
    return tuple(float(v) / float(den) for v in w[: n - 1])


def _so_apply_vec(g: GroupElement, v):
    return tuple(sum(g.m[i][k] * v[k] for k in range(len(v))) for i in range(len(v)))


def mobius_apply(g: GroupElement, x):
    """Boundary action of g at x (``INF`` allowed)."""
    if g.setting == SO:
        return from_null_vector(_so_apply_vec(g, null_vector(x, g.n)), g.n)
    (a, b), (c, d) = g.m
    exact = g.exact and (x is INF or _is_exact(x))
    if not exact:
        a, b, c, d = (_to_complex(v) if g.setting == SL2C or isinstance(x, complex) else float(v)
                      for v in (a, b, c, d))
    if x is INF:
        if c == 0:
            return INF
        return _div(a, c, exact)
    den = c * x + d
    if den == 0:
        return INF
    return _div(a * x + b, den, exact)


def _div(p, q, exact):
    if not exact:
        return p / q
    if isinstance(p, GaussianInteger) or isinstance(q, GaussianInteger):
        # exact Gaussian rational returned as a complex float pair is lossy; keep Fractions
        p, q = GaussianInteger.coerce(p), GaussianInteger.coerce(q)
        t = p * q.conjugate()
        n = q.norm()
        re, im = Fraction(t.re, n), Fraction(t.im, n)
        return re if im == 0 else complex(float(re), float(im))
    return Fraction(p) / Fraction(q)


def conformal_derivative(g: GroupElement, x) -> float:
    """Scalar stretch factor |g'(x)| of the boundary action at finite x."""
    if x is INF:
        raise DomainError("derivative at infinity is not defined in this chart")
    if g.setting == SO:
        w = _so_apply_vec(g, null_vector(x, g.n))
        lam = (w[g.n - 1] + w[g.n]) / 2
        if lam == 0:
            raise DomainError("x is a pole of g")
        return float(1 / Fraction(lam)) if _is_exact(lam) else 1.0 / float(lam)
    (_, _), (c, d) = g.m
    den = _to_complex(c) * (x if isinstance(x, complex) else float(x)) + _to_complex(d)
    if den == 0:
        raise DomainError("x is a pole of g")
    return 1.0 / abs(den) ** 2


def fixed_points(g: GroupElement):
    """(attracting, repelling) boundary fixed points of a hyperbolic g."""
    _require_hyperbolic(g)
    if g.setting == SO:
        a = g.as_array()
        w, v = np.linalg.eig(a)
        order = np.argsort(np.abs(w))
        pts = []
        for idx in (order[-1], order[0]):
            vec = np.real(v[:, idx])
            if vec[-1] < 0:
                vec = -vec
            pts.append(from_null_vector(tuple(float(t) for t in vec), g.n))
        return pts[0], pts[1]
    (a, b), (c, d) = (tuple(_to_complex(v) for v in r) for r in g.m)
    real = g.setting == SL2R
    if abs(c) == 0:
        if abs(a) > abs(d):  # x -> (a/d) x + b/d : finite point repels
            fin = b / (d - a)
            return INF, (fin.real if real else fin)
        fin = b / (d - a)
        return (fin.real if real else fin), INF
    disc = cmath.sqrt((a + d) ** 2 - 4 * g.det)
    roots = [((a - d) + disc) / (2 * c), ((a - d) - disc) / (2 * c)]
    if abs(c * roots[0] + d) < abs(c * roots[1] + d):
        roots.reverse()
    if real:
        return roots[0].real, roots[1].real
    return roots[0], roots[1]


# ------------------------------------------------------------ embedding

def sym_square_embed(g: GroupElement) -> GroupElement:
    """SL2(Z) -> SO(2,1)(Z) through the action S -> g S g^T on symmetric matrices.

    Coordinates (2r, t - p, t + p) for S = (p r; r t); the form is -4 det S.
    The image is integral exactly when the entry sum of g is even.
    """
    if g.setting != SL2R or not g.exact or not all(isinstance(v, int) for v in g.entries):
        raise DomainError("sym_square_embed expects an integral SL2(Z) element")
    (a, b), (c, d) = g.m
    ga = np.array([[a, b], [c, d]], dtype=object)

    def coords(S):
        p, r, t = S[0][0], S[0][1], S[1][1]
        return (2 * r, t - p, t + p)

    # preimages of the basis vectors e1, e2, e3
    basis = [
        ((0, Fraction(1, 2)), (Fraction(1, 2), 0)),
        ((Fraction(-1, 2), 0), (0, Fraction(1, 2))),
        ((Fraction(1, 2), 0), (0, Fraction(1, 2))),
    ]
    cols = []
    for S in basis:
        S2 = ga.dot(np.array(S, dtype=object)).dot(ga.T)
        cols.append(coords(S2))
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            v = Fraction(cols[j][i])
            if v.denominator != 1:
                raise DomainError("image is not integral (entry sum of g must be even)")
            row.append(int(v))
        rows.append(tuple(row))
    return GroupElement(SO, tuple(rows))


def boundary_point_key(x, setting):
    """A hashable float key for a boundary point (used to group orbits)."""
    if x is INF:
        return ("inf",)
    if setting == SO:
        return tuple(round(float(v), 9) for v in x)
    z = complex(x)
    return (round(z.real, 9), round(z.imag, 9))


# ------------------------------------------------------------ vectorised maps

def sl2_coeffs(g: GroupElement) -> tuple[complex, complex, complex, complex]:
    (a, b), (c, d) = g.m
    return tuple(_to_complex(v) for v in (a, b, c, d))


def apply_points(g: GroupElement, X: np.ndarray) -> np.ndarray:
    """Vectorised boundary action on finite points.

    SL2 settings use a complex 1-d array; SO uses an (m, n-1) real array.
    Poles produce ``inf``/``nan`` entries; callers stay away from them.
    """
    if g.setting == SO:
        A = g.as_array()
        n = g.n
        X = np.atleast_2d(X)
        s = np.sum(X * X, axis=1)
        V = np.column_stack([2 * X, 1 - s, 1 + s])
        W = V @ A.T
        den = W[:, n - 1] + W[:, n]
        return W[:, : n - 1] / den[:, None]
    a, b, c, d = sl2_coeffs(g)
    return (a * X + b) / (c * X + d)


def log_derivative_points(g: GroupElement, X: np.ndarray) -> np.ndarray:
    """log |g'(x)| for an array of finite points."""
    if g.setting == SO:
        A = g.as_array()
        n = g.n
        X = np.atleast_2d(X)
        s = np.sum(X * X, axis=1)
        V = np.column_stack([2 * X, 1 - s, 1 + s])
        W = V @ A.T
        lam = (W[:, n - 1] + W[:, n]) / 2
        return -np.log(lam)
    _, _, c, d = sl2_coeffs(g)
    return -2.0 * np.log(np.abs(c * X + d))


def point_distance(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(X) or np.iscomplexobj(Y) or np.ndim(X) <= 1:
        return np.abs(np.asarray(X) - np.asarray(Y))
    return np.linalg.norm(np.asarray(X) - np.asarray(Y), axis=-1)


# ------------------------------------------------------------ generalised balls

@dataclass(frozen=True)
class Ball:
    """Closed round ball in the boundary chart.

    ``center`` is a complex number for the SL2 settings (real for SL2R) and a
    tuple for SO.  ``kind`` is "disk", "exterior" (closed complement of the
    open disk) or "halfspace" (``center`` is then the normal, ``radius`` the
    offset: points with <x, normal> <= radius).
    """

    center: object
    radius: float
    kind: str = "disk"

    def contains(self, X, tol: float = 0.0) -> np.ndarray:
        X = np.asarray(X)
        if self.kind == "halfspace":
            nrm = np.asarray(self.center)
            if np.iscomplexobj(X):
                val = X.real * nrm.real + X.imag * nrm.imag if np.iscomplexobj(nrm) else X.real * nrm
            else:
                val = np.atleast_2d(X) @ np.atleast_1d(nrm)
            return val <= self.radius + tol
        c = self.center
        if np.iscomplexobj(X) or isinstance(c, (complex, float, int)):
            dist = np.abs(X - complex(c))
        else:
            dist = np.linalg.norm(np.atleast_2d(X) - np.asarray(c, dtype=float), axis=-1)
        if self.kind == "disk":
            return dist <= self.radius + tol
        return dist >= self.radius - tol

    @property
    def diameter(self) -> float:
        return 2 * self.radius if self.kind == "disk" else math.inf

    def to_json(self):
        c = self.center
        if isinstance(c, complex):
            c = [c.real, c.imag]
        elif isinstance(c, (int, float)):
            c = [float(c)]
        else:
            c = [float(v) for v in c]
        return {"center": c, "radius": float(self.radius)}


def _hermitian(ball: Ball) -> np.ndarray:
    c = complex(ball.center)
    return np.array([[1, -c], [-np.conj(c), abs(c) ** 2 - ball.radius ** 2]], dtype=complex)


def _ball_from_hermitian(H: np.ndarray, real: bool) -> Ball:
    alpha = H[0, 0].real
    beta = H[0, 1]
    delta = H[1, 1].real
    scale = max(abs(alpha), abs(beta), abs(delta))
    if abs(alpha) <= 1e-14 * scale:
        # 2 Re(conj(beta) x) + delta <= 0, and Re(conj(beta) x) = <x, beta>
        nrm = complex(2 * beta)
        return Ball(nrm.real if real else nrm, -delta, "halfspace")
    center = -beta / alpha
    r2 = (abs(beta) ** 2 - alpha * delta) / alpha ** 2
    r = math.sqrt(max(r2, 0.0))
    center = float(center.real) if real else complex(center)
    return Ball(center, r, "disk" if alpha > 0 else "exterior")


def _so_sphere_vector(ball: Ball, n: int) -> np.ndarray:
    c = np.atleast_1d(np.asarray(ball.center, dtype=float))
    k = float(c @ c) - ball.radius ** 2
    # s_x = c, s_n + s_{n+1} = 1, s_n - s_{n+1} = -k
    return np.concatenate([c, [(1 - k) / 2, (1 + k) / 2]])


def ball_image(g: GroupElement, ball: Ball) -> Ball:
    """Exact (up to float rounding) image of a disk under the boundary action."""
    if ball.kind != "disk":
        raise DomainError("only disks are supported as sources")
    if g.setting == SO:
        n = g.n
        s = g.as_array() @ _so_sphere_vector(ball, n)
        sigma = s[n - 1] + s[n]
        scale = float(np.max(np.abs(s)))
        if abs(sigma) <= 1e-14 * scale:
            return Ball(tuple(float(-v) for v in s[: n - 1]), (s[n - 1] - s[n]) / 2, "halfspace")
        c = s[: n - 1] / sigma
        r2 = float(c @ c) + (s[n - 1] - s[n]) / sigma
        r = math.sqrt(max(r2, 0.0))
        return Ball(tuple(float(v) for v in c), r, "disk" if sigma > 0 else "exterior")
    ginv = g.inverse().as_array(complex)
    H = ginv.conj().T @ _hermitian(ball) @ ginv
    return _ball_from_hermitian(H, real=g.setting == SL2R and not isinstance(ball.center, complex))
