import math

import numpy as np
import pytest

from congcount.arithmetic import GaussianInteger
from congcount.errors import DomainError
from congcount.groups import (
    INF,
    SL2R,
    SO,
    GroupElement,
    complex_translation_length,
    conformal_derivative,
    fixed_points,
    frobenius_norm_sq,
    hyperbolic_distance,
    is_hyperbolic,
    mobius_apply,
    so_form,
    sym_square_embed,
    translation_length,
)
from congcount.semigroup import g_letter

sl2 = GroupElement.sl2


def _random_sl2z(rng, steps=6):
    g = GroupElement.identity(SL2R)
    gens = [sl2(1, 1, 0, 1), sl2(1, 0, 1, 1), sl2(1, -1, 0, 1), sl2(1, 0, -1, 1)]
    for k in rng.integers(0, 4, steps):
        g = g @ gens[int(k)]
    return g


def test_inverse_and_letter_square():
    g = sl2(2, 3, 1, 2)
    assert g @ g.inverse() == GroupElement.identity(SL2R)
    g1 = g_letter(1)
    assert (g1 @ g1).m == ((1, 1), (1, 2))


def test_ebar_times_letter_is_translation():
    ebar = sl2(0, 1, 1, 0)
    for a in (1, 3, GaussianInteger(2, 1)):
        n = ebar @ g_letter(a)
        assert n.m[0][0] == 1 and n.m[1][0] == 0 and n.m[1][1] == 1
        shift = complex(a.re, a.im) if isinstance(a, GaussianInteger) else a
        for x in (0, 2, 0.5):
            assert complex(mobius_apply(n, x)) == pytest.approx(x + shift)


def test_frobenius_norm():
    assert frobenius_norm_sq(GroupElement.identity(SL2R)) == 2
    assert frobenius_norm_sq(g_letter(1)) == 3
    g = sl2(3, 4, 2, 3)
    e = sym_square_embed(g)
    assert frobenius_norm_sq(e) == sum(v * v for row in e.m for v in row)


def test_mobius_and_derivative():
    g1 = g_letter(1)
    assert mobius_apply(GroupElement.identity(SL2R), 0.3) == 0.3
    assert mobius_apply(g1, 1) == pytest.approx(0.5)
    assert conformal_derivative(g1, 0) == 1.0
    assert conformal_derivative(g1, 1) == pytest.approx(0.25)


def test_so_derivative_finite_difference():
    e = sym_square_embed(sl2(3, 4, 2, 3))
    for x in (0.1, -0.7, 2.3):
        h = 1e-6
        hi, lo = mobius_apply(e, (x + h,)), mobius_apply(e, (x - h,))
        fd = abs(float(hi[0]) - float(lo[0])) / (2 * h)
        assert conformal_derivative(e, (x,)) == pytest.approx(fd, rel=1e-6)


def test_translation_lengths():
    t = 1.3
    d = sl2(math.exp(t / 2), 0, 0, math.exp(-t / 2))
    l, th = complex_translation_length(d)
    assert l == pytest.approx(t, abs=1e-12) and th == pytest.approx(0, abs=1e-12)
    assert translation_length(sl2(2, 1, 1, 1)) == pytest.approx(2 * math.acosh(1.5), abs=1e-12)
    assert hyperbolic_distance(d) == pytest.approx(t, abs=1e-12)
    assert hyperbolic_distance(GroupElement.identity(SL2R)) == 0


def test_fixed_points():
    e = math.e
    att, rep = fixed_points(sl2(e, 0, 0, 1 / e))
    assert att is INF and rep == 0
    att, rep = fixed_points(g_letter(1) @ g_letter(1))
    assert att == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-14)
    g = sl2(2, 1, 1, 1)
    a1, r1 = fixed_points(g)
    a2, r2 = fixed_points(g.inverse())
    assert a1 == pytest.approx(r2) and r1 == pytest.approx(a2)


def test_hyperbolicity():
    assert is_hyperbolic(sl2(2, 1, 1, 1))
    assert not is_hyperbolic(sl2(1, 1, 0, 1))
    with pytest.raises(DomainError):
        fixed_points(sl2(1, 1, 0, 1))


def test_sym_square_embed():
    Q = so_form(2)
    I3 = GroupElement.identity(SO, 2)
    assert sym_square_embed(GroupElement.identity(SL2R)) == I3
    rng = np.random.default_rng(1)
    done = 0
    while done < 100:
        g, h = _random_sl2z(rng), _random_sl2z(rng)
        if (sum(g.entries) % 2) or (sum(h.entries) % 2):
            continue
        eg, eh, egh = sym_square_embed(g), sym_square_embed(h), sym_square_embed(g @ h)
        assert egh == eg @ eh
        M = np.array(eg.m, dtype=object)
        assert (M.T.dot(Q.astype(object)).dot(M) == Q).all()
        done += 1


def test_distance_cross_model():
    rng = np.random.default_rng(2)
    done = 0
    while done < 50:
        g = _random_sl2z(rng, 8)
        if sum(g.entries) % 2:
            continue
        assert hyperbolic_distance(g) == pytest.approx(hyperbolic_distance(sym_square_embed(g)), abs=1e-9)
        done += 1
