"""Generating data for Schottky and continued-fractions semigroups.

Symbols are 0-based throughout the library: a word is a tuple of ints in
``range(spec.N)``.  The element of a word ``(w_0, ..., w_{k-1})`` is the
product ``g_{w_0} g_{w_1} ... g_{w_{k-1}}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Sequence

import numpy as np

from .arithmetic import GaussianInteger, parse_ring_element
from .errors import ConstructionError, DomainError
from .groups import (
    SL2C,
    SL2R,
    SO,
    Ball,
    GroupElement,
    apply_points,
    ball_image,
    fixed_points,
    frobenius_norm_sq,
    hyperbolic_distance,
    is_hyperbolic,
    sym_square_embed,
)

Word = tuple

GUARD = 1e-12


def g_letter(a) -> GroupElement:
    """The single-letter map (0 1; 1 a), x -> 1/(x + a); det -1."""
    return GroupElement.sl2(0, 1, 1, a)


# ---------------------------------------------------------------- CF region

def _region_excess(Y: np.ndarray, eps: float) -> np.ndarray:
    """max of the three constraint violations of the trimmed region (<= 0 inside)."""
    c = 0.5 - eps / 4
    return np.maximum.reduce([np.abs(Y - 0.5) - 0.5, eps - Y.real, Y.imag - c])


def _region_boundary(eps: float, m: int = 512) -> np.ndarray:
    """Boundary samples of the trimmed region, corners included."""
    c = 0.5 - eps / 4
    t = np.linspace(0, 2 * np.pi, 4 * m, endpoint=False)
    arc = 0.5 + 0.5 * np.exp(1j * t)
    h = math.sqrt(max(eps - eps * eps, 0.0))
    left = eps + 1j * np.linspace(-h, h, m)
    s = math.sqrt(max(0.25 - c * c, 0.0))
    top = np.linspace(0.5 - s, 0.5 + s, m) + 1j * c
    corners = np.array([eps + 1j * h, eps - 1j * h, 0.5 - s + 1j * c, 0.5 + s + 1j * c,
                        eps + 1j * min(h, c)])
    pts = np.concatenate([arc, left, top, corners])
    return pts[_region_excess(pts, eps) <= 1e-12]


def _trim_violations(alphabet, eps: float) -> list[str]:
    """Containment and disjointness checks for the trimmed disks."""
    out = []
    c = 0.5 - eps / 4
    # translates of the region by distinct letters are disjoint: width 1 - eps, height 1 - eps/4
    for i, a in enumerate(alphabet):
        for b in alphabet[i + 1:]:
            da, db = complex(a), complex(b)
            if abs(da.real - db.real) < 1 - eps and abs(da.imag - db.imag) < 1 - eps / 4:
                out.append(f"trimmed disks of letters {a} and {b} overlap")
    # region + a inside the inversion image of the region
    bd = _region_boundary(eps)
    R = 1 / (2 * eps)
    rc = 1 / (2 * c)
    for a in alphabet:
        P = bd + complex(a)
        bad = (P.real < 1 - GUARD) | (np.abs(P - R) > R + GUARD) | (np.abs(P + 1j * rc) < rc - GUARD)
        if bad.any():
            out.append(f"trimmed disk of letter {a} not contained in the region")
        elif _region_excess(np.array([-1j * rc]) - complex(a), eps)[0] <= 0:
            out.append(f"excluded disk inside translate of letter {a}")
    return out


# ---------------------------------------------------------------- specs

@dataclass(frozen=True, eq=False)
class CFSpec:
    alphabet: tuple
    epsilon: float
    kind: str = field(default="cf", init=False)

    def __post_init__(self):
        alph = tuple(parse_ring_element(a) if not isinstance(a, (int, GaussianInteger)) else a
                     for a in self.alphabet)
        norm_alph = []
        for a in alph:
            if isinstance(a, GaussianInteger) and a.im == 0:
                a = a.re
            norm_alph.append(a)
        alph = tuple(norm_alph)
        if len(alph) < 2:
            raise DomainError("the alphabet needs at least two letters")
        if len(set(alph)) != len(alph):
            raise DomainError("repeated letters in the alphabet")
        for a in alph:
            re = a.re if isinstance(a, GaussianInteger) else a
            if re < 1:
                raise DomainError(f"letter {a} is not in N + iZ")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "alphabet", alph)

    @property
    def setting(self) -> str:
        return SL2C if any(isinstance(a, GaussianInteger) for a in self.alphabet) else SL2R

    @property
    def real(self) -> bool:
        return self.setting == SL2R

    @property
    def n(self) -> int:
        return 2 if self.real else 3

    @cached_property
    def letters(self) -> list[tuple]:
        return [(a, b) for a in self.alphabet for b in self.alphabet]

    @property
    def N(self) -> int:
        return len(self.letters)

    @cached_property
    def generators(self) -> list[GroupElement]:
        return [g_letter(a) @ g_letter(b) for a, b in self.letters]

    @cached_property
    def transition(self) -> np.ndarray:
        return np.ones((self.N, self.N), dtype=bool)

    def admissible_pair(self, i: int, j: int) -> bool:
        return True

    def identity(self) -> GroupElement:
        return GroupElement.identity(self.setting)

    @cached_property
    def base_ball(self) -> Ball:
        if self.real:
            return Ball((self.epsilon + 1) / 2, (1 - self.epsilon) / 2)
        return Ball(complex(0.5), 0.5)

    @cached_property
    def disks(self) -> list[Ball]:
        """Hull of each generator's trimmed disk."""
        return [ball_image(g, self.base_ball) for g in self.generators]

    def in_disk(self, j: int, X: np.ndarray) -> np.ndarray:
        """Signed membership of points in D_j: -1 outside, 1 inside, 0 within the guard band."""
        Y = apply_points(self.generators[j].inverse(), np.asarray(X, dtype=complex))
        e = _region_excess(Y, self.epsilon)
        return np.where(e < -GUARD, 1, np.where(e > GUARD, -1, 0))

    def contraction_bounds(self) -> tuple[float, float]:
        """(1 + eps, 1 + C) with C > max |a|: the sandwich for |T'|^(1/4)."""
        C = max(abs(complex(a)) for a in self.alphabet)
        return 1 + self.epsilon, 1 + C + 1e-9

    def to_json(self) -> dict:
        return {
            "setting": "cf",
            "n": self.n,
            "alphabet": [[a.re, a.im] if isinstance(a, GaussianInteger) else [a, 0] for a in self.alphabet],
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True, eq=False)
class SchottkySpec:
    n: int
    N0: int
    N1: int
    disks: tuple
    base_generators: tuple
    kind: str = field(default="schottky", init=False)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be at least 2")
        if not 0 <= self.N1 <= self.N0:
            raise DomainError("need 0 <= N1 <= N0")
        if len(self.disks) != 2 * self.N0:
            raise DomainError(f"expected {2 * self.N0} disks")
        if len(self.base_generators) != self.N0:
            raise DomainError(f"expected {self.N0} generators")
        for g in self.base_generators:
            if g.setting != SO or g.n != self.n:
                raise DomainError("Schottky generators must be SO(n,1) integer matrices")
        if self.N0 + self.N1 < 2:
            raise DomainError("need at least two symbols")

    setting = SO

    @property
    def N(self) -> int:
        return self.N0 + self.N1

    @cached_property
    def generators(self) -> list[GroupElement]:
        gens = list(self.base_generators)
        gens += [g.inverse() for g in self.base_generators[: self.N1]]
        return gens

    @cached_property
    def transition(self) -> np.ndarray:
        idx = np.arange(self.N)
        return np.abs(idx[:, None] - idx[None, :]) != self.N0

    def admissible_pair(self, i: int, j: int) -> bool:
        return abs(i - j) != self.N0

    def identity(self) -> GroupElement:
        return GroupElement.identity(SO, self.n)

    @property
    def symbol_disks(self) -> list[Ball]:
        return list(self.disks[: self.N])

    def in_disk(self, j: int, X: np.ndarray) -> np.ndarray:
        d = self.disks[j]
        X = np.atleast_2d(np.asarray(X, dtype=float))
        e = np.linalg.norm(X - np.asarray(d.center, dtype=float), axis=1) - d.radius
        return np.where(e < -GUARD, 1, np.where(e > GUARD, -1, 0))

    @cached_property
    def base_point_margin(self) -> float:
        """max over disks of the distance from o to the hyperplane bounded by the disk."""
        out = 0.0
        for d in self.disks:
            c = np.asarray(d.center, dtype=float)
            out = max(out, math.asinh(abs(1 + c @ c - d.radius ** 2) / (2 * d.radius)))
        return out

    def to_json(self) -> dict:
        return {
            "setting": "schottky",
            "n": self.n,
            "N0": self.N0,
            "N1": self.N1,
            "generators": [[v for r in g.m for v in r] for g in self.base_generators],
            "disks": [{"center": [float(v) for v in d.center], "radius": float(d.radius)}
                      for d in self.disks],
        }


SemigroupSpec = CFSpec | SchottkySpec


# ---------------------------------------------------------------- construction

def find_trim_epsilon(alphabet: Sequence) -> float:
    """Largest eps = k/1024 for which the trimmed disks nest and stay disjoint."""
    alph = [parse_ring_element(a) if not isinstance(a, (int, GaussianInteger)) else a for a in alphabet]
    if len(set(alph)) < 2:
        raise DomainError("the alphabet needs at least two letters")
    for a in alph:
        if (a.re if isinstance(a, GaussianInteger) else a) < 1:
            raise DomainError(f"letter {a} is not in N + iZ")
    for k in range(1023, 0, -1):
        eps = k / 1024
        if not _trim_violations(alph, eps):
            return eps
    raise ConstructionError("no trim parameter on the 2^-10 grid works for this alphabet")


def cf_spec(alphabet: Sequence, epsilon: float | None = None) -> CFSpec:
    if epsilon is None:
        epsilon = find_trim_epsilon(alphabet)
    return CFSpec(tuple(alphabet), epsilon)


def isometric_circle_disks(g: GroupElement) -> tuple[Ball, Ball]:
    """For SL2(R) g = (a b; c d): (image disk, source disk) of the isometric circles."""
    (a, b), (c, d) = g.m
    if c == 0:
        raise DomainError("isometric circles need c != 0")
    r = 1 / abs(c)
    return Ball((a / c,), r), Ball((-d / c,), r)


def schottky_from_sl2(gens: Sequence[GroupElement], N1: int | None = None) -> SchottkySpec:
    """Schottky spec in SO(2,1) from SL2(Z) elements with disjoint isometric circles."""
    N0 = len(gens)
    N1 = N0 if N1 is None else N1
    img, src = zip(*(isometric_circle_disks(g) for g in gens))
    embedded = tuple(sym_square_embed(g) for g in gens)
    return SchottkySpec(2, N0, N1, tuple(img) + tuple(src), embedded)


def example_schottky(N1: int = 2) -> SchottkySpec:
    """Two hyperbolic elements of SL2(Z) embedded in SO(2,1)(Z)."""
    g1 = GroupElement.sl2(3, 4, 2, 3)
    g2 = GroupElement.sl2(5, 2, 12, 5)
    return schottky_from_sl2([g1, g2], N1=N1)


# ---------------------------------------------------------------- validation

def validate_ping_pong(spec) -> dict:
    """Check the ping-pong conditions; violations are listed, never raised."""
    violations: list[str] = []
    if spec.kind == "cf":
        violations += _trim_violations(list(spec.alphabet), spec.epsilon)
        # images of the region under the block generators: sampled pairwise disjointness
        bd = _region_boundary(spec.epsilon, 256)
        for j, g in enumerate(spec.generators):
            img = apply_points(g, bd)
            if spec.real:
                img = img[np.abs(img.imag) < 1e-12]
            for k in range(spec.N):
                if k != j and (spec.in_disk(k, img) > 0).any():
                    violations.append(f"disks {j} and {k} intersect")
            if (_region_excess(img, spec.epsilon) > 1e-9).any():
                violations.append(f"disk {j} leaves the region")
    else:
        disks = spec.disks
        for i in range(len(disks)):
            for k in range(i + 1, len(disks)):
                ci = np.asarray(disks[i].center, float)
                ck = np.asarray(disks[k].center, float)
                if np.linalg.norm(ci - ck) <= disks[i].radius + disks[k].radius:
                    violations.append(f"disks {i} and {k} intersect")
            c = np.asarray(disks[i].center, float)
            if c @ c + 1 <= disks[i].radius ** 2:
                violations.append(f"base point lies over disk {i}")
        for j, g in enumerate(spec.base_generators):
            if not is_hyperbolic(g):
                violations.append(f"generator {j} is not hyperbolic")
                continue
            src, dst = disks[j + spec.N0], disks[j]
            img = ball_image(g, src)
            ok = (img.kind == "exterior"
                  and np.allclose(np.asarray(img.center, float), np.asarray(dst.center, float), atol=1e-9)
                  and abs(img.radius - dst.radius) < 1e-9)
            # a sampled point just outside the source must land inside the target
            probe = np.asarray(src.center, float) + np.eye(spec.n - 1)[0] * src.radius * 1.5
            ok = ok and bool(spec.in_disk(j, apply_points(g, probe[None, :]))[0] > 0)
            if not ok:
                violations.append(f"generator {j} does not map the exterior of disk {j + spec.N0} onto disk {j}")
    return {"ok": not violations, "violations": violations}


# ---------------------------------------------------------------- words

def _check_symbols(word, spec):
    for s in word:
        if not isinstance(s, (int, np.integer)) or not 0 <= s < spec.N:
            raise DomainError(f"symbol {s!r} out of range 0..{spec.N - 1}")


def is_admissible(word: Sequence[int], spec) -> bool:
    _check_symbols(word, spec)
    return all(spec.admissible_pair(word[i], word[i + 1]) for i in range(len(word) - 1))


def word_to_element(word: Sequence[int], spec) -> GroupElement:
    if not is_admissible(word, spec):
        raise DomainError(f"word {tuple(word)} is not admissible")
    out = spec.identity()
    for s in word:
        out = out @ spec.generators[s]
    return out


def count_admissible(spec, k: int) -> int:
    if k == 0:
        return 1
    A = spec.transition.astype(object)
    v = np.ones(spec.N, dtype=object)
    for _ in range(k - 1):
        v = A.dot(v)
    return int(v.sum())


def words_of_length(spec, k: int) -> Iterator[Word]:
    if k == 0:
        yield ()
        return
    stack = [(j,) for j in reversed(range(spec.N))]
    while stack:
        w = stack.pop()
        if len(w) == k:
            yield w
            continue
        for j in reversed(range(spec.N)):
            if spec.admissible_pair(w[-1], j):
                stack.append(w + (j,))


def distance_bound_from_norm(spec, norm_sq_bound) -> float:
    """Largest d(o, g o) compatible with ||g||^2 <= bound."""
    if spec.setting == SO:
        x = (norm_sq_bound - (spec.n - 1)) / 2
        return math.acosh(max(x, 1.0)) / 2
    return math.acosh(max(norm_sq_bound / 2, 1.0))


def enumerate_words(spec, max_norm_sq=None, max_length: int | None = None,
                    visitor: Callable | None = None):
    """Every admissible word meeting the bounds, each visited once (empty word included).

    Returns an iterator of (word, element), or the visit count when a
    visitor is supplied.  Pruning: for CF specs the Frobenius norm is
    nondecreasing under right extension; for Schottky specs a prefix is
    dropped once d(o, w o) exceeds the norm's distance bound plus the
    base-point margin, after which no extension can come back.
    """
    if max_norm_sq is None and max_length is None:
        raise DomainError("enumeration needs a norm or a length bound")
    it = _enumerate(spec, max_norm_sq, max_length)
    if visitor is None:
        return it
    count = 0
    for w, g in it:
        visitor(w, g)
        count += 1
    return count


def _enumerate(spec, max_norm_sq, max_length):
    dmax = None
    if max_norm_sq is not None and spec.kind == "schottky":
        dmax = distance_bound_from_norm(spec, max_norm_sq) + spec.base_point_margin + 1e-9
    stack = [((), spec.identity())]
    while stack:
        w, g = stack.pop()
        nrm = frobenius_norm_sq(g)
        within = max_norm_sq is None or nrm <= max_norm_sq
        if within:
            yield w, g
        if max_length is not None and len(w) >= max_length:
            continue
        if not within:
            if spec.kind == "cf":
                continue
            if hyperbolic_distance(g) > dmax:
                continue
        children = []
        for j in range(spec.N):
            if w and not spec.admissible_pair(w[-1], j):
                continue
            children.append((w + (j,), g @ spec.generators[j]))
        stack.extend(reversed(children))


# ---------------------------------------------------------------- anchors

def anchor_point(spec, y: int):
    """Attracting fixed point of g_y; (y, y, ...) is always admissible."""
    p = fixed_points(spec.generators[y])[0]
    if spec.setting == SO:
        return np.asarray(p, dtype=float)
    return complex(p)


# ---------------------------------------------------------------- JSON

def spec_from_json(doc: dict):
    try:
        setting = doc["setting"]
    except KeyError as exc:
        raise DomainError("spec document lacks 'setting'") from exc
    if setting == "cf":
        alph = [parse_ring_element(a) for a in doc["alphabet"]]
        alph = [a.re if isinstance(a, GaussianInteger) and a.im == 0 else a for a in alph]
        eps = doc.get("epsilon")
        spec = cf_spec(alph, eps)
        if "n" in doc and doc["n"] != spec.n:
            raise DomainError(f"n = {doc['n']} does not match the alphabet (n = {spec.n})")
        return spec
    if setting == "schottky":
        n = int(doc["n"])
        size = n + 1
        gens = []
        for flat in doc["generators"]:
            if len(flat) != size * size:
                raise DomainError(f"generator needs {size * size} entries")
            gens.append(GroupElement(SO, tuple(tuple(int(v) for v in flat[i * size:(i + 1) * size])
                                               for i in range(size))))
        disks = tuple(Ball(tuple(float(v) for v in d["center"]), float(d["radius"]))
                      for d in doc["disks"])
        for d in disks:
            if len(d.center) != n - 1 or d.radius <= 0:
                raise DomainError("disk centers need n-1 coordinates and positive radius")
        N0 = int(doc.get("N0", len(gens)))
        N1 = int(doc.get("N1", N0))
        return SchottkySpec(n, N0, N1, disks, tuple(gens))
    raise DomainError(f"unknown setting {setting!r}")


def load_spec(path: str):
    with open(path, encoding="utf-8") as fh:
        return spec_from_json(json.load(fh))
