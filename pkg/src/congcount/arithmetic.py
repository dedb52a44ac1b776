"""Exact arithmetic over Z and Z[i] and their residue rings.

Ring elements are plain Python ``int`` for Z and :class:`GaussianInteger`
for Z[i].  Nothing here touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import isqrt
from typing import Iterator, Union

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, slots=True)
class GaussianInteger:
    re: int
    im: int = 0

    def __post_init__(self):
        if not (isinstance(self.re, (int, np.integer)) and isinstance(self.im, (int, np.integer))):
            raise TypeError("GaussianInteger components must be integers")
        object.__setattr__(self, "re", int(self.re))
        object.__setattr__(self, "im", int(self.im))

    @classmethod
    def coerce(cls, x) -> "GaussianInteger":
        if isinstance(x, GaussianInteger):
            return x
        if isinstance(x, (int, np.integer)):
            return cls(int(x), 0)
        if isinstance(x, complex) and x.real.is_integer() and x.imag.is_integer():
            return cls(int(x.real), int(x.imag))
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return cls(int(x[0]), int(x[1]))
        raise TypeError(f"cannot interpret {x!r} as a Gaussian integer")

    def __add__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianInteger(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianInteger(-self.re, -self.im)

    def __sub__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianInteger(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return o
        return GaussianInteger(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative powers are not ring elements")
        out, base = GaussianInteger(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        o = _as_gauss(other)
        if o is NotImplemented:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re or self.im)

    def __complex__(self):
        return complex(self.re, self.im)

    def conjugate(self) -> "GaussianInteger":
        return GaussianInteger(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return self.im == 0

    def __divmod__(self, other):
        return gauss_divmod(self, _as_gauss(other))

    def __floordiv__(self, other):
        return gauss_divmod(self, _as_gauss(other))[0]

    def __mod__(self, other):
        return gauss_divmod(self, _as_gauss(other))[1]

    def __repr__(self):
        if self.im == 0:
            return f"G({self.re})"
        return f"G({self.re}{self.im:+d}i)"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        return f"{self.re}{self.im:+d}i"


def _as_gauss(x):
    if isinstance(x, GaussianInteger):
        return x
    if isinstance(x, (int, np.integer)):
        return GaussianInteger(int(x), 0)
    return NotImplemented


RingElement = Union[int, GaussianInteger]
I = GaussianInteger(0, 1)


def _round_div(a: int, b: int) -> int:
    """Nearest integer to a/b (b > 0), halves rounded down."""
    return (2 * a + b) // (2 * b)


def gauss_divmod(x: GaussianInteger, q: GaussianInteger):
    """Division with remainder of minimal norm (N(r) <= N(q)/2)."""
    if not q:
        raise DomainError("division by zero")
    n = q.norm()
    t = x * q.conjugate()
    k = GaussianInteger(_round_div(t.re, n), _round_div(t.im, n))
    return k, x - k * q


def is_gaussian(x) -> bool:
    return isinstance(x, GaussianInteger)


def norm(q: RingElement) -> int:
    """|q| over Z, |q|^2 over Z[i]; the size of O/qO."""
    if isinstance(q, GaussianInteger):
        if not q:
            raise DomainError("zero modulus")
        return q.norm()
    q = int(q)
    if q == 0:
        raise DomainError("zero modulus")
    return abs(q)


def is_unit(q: RingElement) -> bool:
    return norm(q) == 1


def gcd(a: RingElement, b: RingElement) -> RingElement:
    """Euclidean gcd; over Z[i] the result is defined up to a unit."""
    if isinstance(a, GaussianInteger) or isinstance(b, GaussianInteger):
        a, b = GaussianInteger.coerce(a), GaussianInteger.coerce(b)
        while b:
            a, b = b, gauss_divmod(a, b)[1]
        return a
    a, b = abs(int(a)), abs(int(b))
    while b:
        a, b = b, a % b
    return a


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    a0, b0 = a, b
    while b0:
        k = a0 // b0
        a0, b0 = b0, a0 - k * b0
        x0, x1 = x1, x0 - k * x1
        y0, y1 = y1, y0 - k * y1
    if a0 < 0:
        a0, x0, y0 = -a0, -x0, -y0
    return a0, x0, y0


def coprime(a: RingElement, b: RingElement) -> bool:
    if not a and not b:
        raise DomainError("coprime(0, 0) is undefined")
    return is_unit(gcd(a, b))


def divides(a: RingElement, b: RingElement) -> bool:
    if isinstance(a, GaussianInteger) or isinstance(b, GaussianInteger):
        a, b = GaussianInteger.coerce(a), GaussianInteger.coerce(b)
        if not a:
            return not b
        t = b * a.conjugate()
        n = a.norm()
        return t.re % n == 0 and t.im % n == 0
    a, b = int(a), int(b)
    return b == 0 if a == 0 else b % a == 0


def _prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _sqrt_minus_one(p: int) -> int:
    for g in range(2, p):
        x = pow(g, (p - 1) // 4, p)
        if x * x % p == p - 1:
            return x
    raise DomainError(f"-1 is not a square mod {p}")


def gaussian_primes_over(p: int) -> list[GaussianInteger]:
    """Gaussian primes dividing the rational prime p (one per associate class)."""
    if p == 2:
        return [GaussianInteger(1, 1)]
    if p % 4 == 3:
        return [GaussianInteger(p, 0)]
    x = _sqrt_minus_one(p)
    pi = gcd(GaussianInteger(p, 0), GaussianInteger(x, 1))
    return [pi, pi.conjugate()]


def is_square_free(q: RingElement) -> bool:
    n = norm(q)
    if n == 1:
        raise DomainError("units are not admissible moduli here")
    if not isinstance(q, GaussianInteger):
        return all((n // p) % p != 0 for p in _prime_factors(n))
    for p in _prime_factors(n):
        for pi in gaussian_primes_over(p):
            if divides(pi * pi, q):
                return False
    return True


def parse_ring_element(x) -> RingElement:
    """Accept ``int``, ``[re, im]`` or a GaussianInteger; collapse real Gaussians to nothing."""
    if isinstance(x, GaussianInteger):
        return x
    if isinstance(x, (list, tuple)):
        return GaussianInteger(int(x[0]), int(x[1]))
    if isinstance(x, str):
        z = complex(x.replace("i", "j"))
        return GaussianInteger(int(z.real), int(z.imag))
    return int(x)


# ---------------------------------------------------------------- residues

def _gauss_canonical(re: int, im: int, q: GaussianInteger) -> tuple[int, int]:
    n = q.norm()
    t = GaussianInteger(re, im) * q.conjugate()
    best = None
    for kr in (t.re // n, t.re // n + 1):
        for ki in (t.im // n, t.im // n + 1):
            r = GaussianInteger(re, im) - GaussianInteger(kr, ki) * q
            key = (r.norm(), r.re < 0, r.im < 0, r.re, r.im)
            if best is None or key < best[0]:
                best = (key, r)
    r = best[1]
    return r.re, r.im


def reduce(x: RingElement, q: RingElement) -> RingElement:
    """Canonical representative of x mod q.

    Over Z: the representative in [0, |q|).  Over Z[i]: the remainder of
    minimal norm, ties broken toward nonnegative real part, then
    nonnegative imaginary part, then lexicographically smallest.
    """
    if isinstance(q, GaussianInteger) and q.im == 0 and not isinstance(x, GaussianInteger):
        return GaussianInteger(*_gauss_canonical(int(x), 0, q))
    if isinstance(q, GaussianInteger):
        x = GaussianInteger.coerce(x)
        return GaussianInteger(*_gauss_canonical(x.re, x.im, q))
    if isinstance(x, GaussianInteger):
        raise DomainError("cannot reduce a Gaussian integer modulo a rational modulus")
    return int(x) % abs(int(q))


@dataclass(frozen=True, slots=True)
class Residue:
    value: RingElement
    modulus: RingElement

    def __post_init__(self):
        norm(self.modulus)
        object.__setattr__(self, "value", reduce(self.value, self.modulus))

    def _check(self, other):
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise DomainError("residues with different moduli")
            return other.value
        return other

    def __add__(self, other):
        return Residue(self.value + self._check(other), self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        return Residue(self.value - self._check(other), self.modulus)

    def __mul__(self, other):
        return Residue(self.value * self._check(other), self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue(-self.value, self.modulus)


def residues(q: RingElement) -> list[RingElement]:
    """All canonical residues mod q, in a deterministic order."""
    n = norm(q)
    if not isinstance(q, GaussianInteger):
        return list(range(n))
    seen = set()
    out = []
    # every class has a representative with |re|, |im| <= |q|
    r = isqrt(n) + 1
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            c = _gauss_canonical(a, b, q)
            if c not in seen:
                seen.add(c)
                out.append(GaussianInteger(*c))
    out.sort(key=lambda z: (z.re, z.im))
    return out


def iter_gaussian_box(radius: int) -> Iterator[GaussianInteger]:
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            yield GaussianInteger(a, b)


# ------------------------------------------------ vectorised reductions

def reduce_int_array(a: np.ndarray, q: int) -> np.ndarray:
    return np.mod(a, abs(int(q)))


def reduce_gauss_arrays(re: np.ndarray, im: np.ndarray, q: GaussianInteger):
    """Vectorised :func:`reduce` for int64 component arrays (small values)."""
    n = q.norm()
    qr, qi = q.re, q.im
    tr = re * qr + im * qi
    ti = im * qr - re * qi
    best_key = None
    out_r = out_i = None
    for dr in (0, 1):
        for di in (0, 1):
            kr = np.floor_divide(tr, n) + dr
            ki = np.floor_divide(ti, n) + di
            rr = re - (kr * qr - ki * qi)
            ri = im - (kr * qi + ki * qr)
            nn = rr * rr + ri * ri
            if best_key is None:
                best_key = (nn, rr, ri)
                out_r, out_i = rr, ri
                continue
            bn, br, bi = best_key
            better = _lex_less(
                [nn, (rr < 0), (ri < 0), rr, ri],
                [bn, (br < 0), (bi < 0), br, bi],
            )
            out_r = np.where(better, rr, out_r)
            out_i = np.where(better, ri, out_i)
            best_key = (np.where(better, nn, bn), out_r, out_i)
    return out_r, out_i


def _lex_less(a, b):
    less = np.zeros(np.shape(a[0]), dtype=bool)
    eq = np.ones(np.shape(a[0]), dtype=bool)
    for x, y in zip(a, b):
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        less |= eq & (x < y)
        eq &= x == y
    return less
