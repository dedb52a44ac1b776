import math
from fractions import Fraction

import numpy as np
import pytest

from congcount.arithmetic import GaussianInteger
from congcount.counting import (
    CountLedger,
    TestFunction,
    ball_count,
    boundary_count,
    compare_sides,
    default_radius_sq,
    equidistribution_report,
    exponent_fit,
    frobenius_distance_check,
    renewal_check,
    renewal_sides,
    star_count,
    star_renewal_check,
    zaremba_density,
    zaremba_sets,
)
from congcount.dynamics import sample_limit_points
from congcount.errors import DomainError, ResourceError
from congcount.semigroup import word_to_element
from oracles import brute_ball_totals, zaremba_denominators


def _blocks(spec):
    return [g.m for g in spec.generators]


def test_ball_count_against_brute_force(cf12):
    led = ball_count(cf12, 1, R0=10, checkpoints=5)
    rsq = default_radius_sq(10, 5)
    assert list(led.totals) == brute_ball_totals(_blocks(cf12), rsq, scale=2)


def test_ball_count_with_base_word(cf12):
    g0 = (1, 2)
    led = ball_count(cf12, 1, gamma0=g0, R0=10, checkpoints=3)
    G0 = word_to_element(g0, cf12)
    n0 = sum(v * v for row in G0.m for v in row)
    # brute force: words gamma (free shift) with ||gamma g0||^2 <= R^2 ||g0||^2
    rsq = default_radius_sq(10, 3)
    counts = [0] * 3
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            g = word_to_element(w + g0, cf12)
            n = sum(v * v for row in g.m for v in row)
            for j, r in enumerate(rsq):
                if n <= math.floor(r * n0):
                    counts[j] += 1
            if n <= rsq[-1] * n0:
                nxt += [w + (s,) for s in range(4)]
        frontier = nxt
    assert list(led.totals) == counts


def test_small_radius_only_identity(cf12):
    led = ball_count(cf12, 1, radii=[1, Fraction(11, 10)])
    assert list(led.totals) == [1, 1]


def test_q2_identity_class_early(cf12):
    led = ball_count(cf12, 2, R0=5, checkpoints=3)
    e = 0
    # identity itself plus g_{2,2} = (1 2; 2 5), norm^2 34 <= 2 * 25
    assert led.counts[0, e] == 2


def test_budget_partial(cf12):
    with pytest.raises(ResourceError) as exc:
        ball_count(cf12, 3, R0=1000, budget=10)
    assert exc.value.partial.partial


def test_schottky_ball_count(schottky):
    led = ball_count(schottky, 2, R0=10, checkpoints=6)
    assert led.totals[-1] >= led.totals[0] >= 1
    assert led.counts.sum(axis=1).tolist() == list(led.totals)


def test_exponent_fit_synthetic():
    R = np.geomspace(10, 1e4, 10)
    tot = np.floor(R ** 1.06).astype(np.int64)
    led = CountLedger(list(R), [Fraction(r) ** 2 for r in R], 1, (), 1, tot[:, None], tot[:, None].astype(float))
    assert exponent_fit(led)["slope"] == pytest.approx(1.06, abs=0.01)
    one = CountLedger([10.0], [Fraction(100)], 1, (), 1, np.array([[5]]), np.array([[5.0]]))
    with pytest.raises(DomainError):
        exponent_fit(one)


def test_equidistribution_synthetic():
    uni = np.full((2, 4), 10)
    led = CountLedger([1.0, 2.0], [1, 4], 2, (), 4, uni, uni.astype(float))
    assert equidistribution_report(led)["tv_attained"] == [0.0, 0.0]
    spike = np.array([[0, 0, 7, 0], [3, 0, 9, 1]])
    led = CountLedger([1.0, 2.0], [1, 4], 2, (), 4, spike, spike.astype(float))
    rep = equidistribution_report(led)
    assert rep["tv_attained"][0] == 0.0          # one attained class: TV = 1 - 1/1
    assert rep["tv_full"][0] == pytest.approx(1 - 1 / 4)


def test_equidistribution_trend(cf12):
    led = ball_count(cf12, 3, R0=1000, checkpoints=6)
    rep = equidistribution_report(led)
    assert rep["tv_attained"][-1] < rep["tv_attained"][0]


def test_frobenius_distance(cf12, gauss_spec):
    assert frobenius_distance_check(cf12, (10, 100))["violations"] == 0
    assert frobenius_distance_check(gauss_spec, (10, 30))["violations"] == 0


def test_boundary_count_basics(cf12):
    U, _ = sample_limit_points(cf12, 3, seed=1)
    u = complex(U[0])
    assert not boundary_count(cf12, 2, -0.5, u).any()
    v = boundary_count(cf12, 2, 0.0, u)
    assert v[0] == 1.0 and v.sum() == 1.0
    a = boundary_count(cf12, 3, 4.0, u, order="bfs")
    b = boundary_count(cf12, 3, 4.0, u, order="dfs")
    assert np.array_equal(a, b)


def test_renewal(cf12, schottky):
    U, _ = sample_limit_points(cf12, 3, seed=1)
    u = complex(U[1])
    F = TestFunction((((0,), 0.5), ((1, 3), 2.0)), 1.0)
    assert renewal_check(cf12, 2, 3.0, u, F=F)
    assert renewal_check(cf12, 2, -1.0, u)
    assert star_renewal_check(cf12, 3, 4.0, (1,), F=F)
    assert star_renewal_check(schottky, 2, 3.0, (0,))
    # perturbing one weight must be caught
    lhs, rhs, _ = renewal_sides(cf12, 2, 3.0, u, F)
    P = next(iter(rhs))
    c, w = rhs[P]
    rhs[P] = (c, w * (1 + 1e-3))
    exact, disc = compare_sides(lhs, rhs)
    assert exact and disc > 1e-9


def test_star_count_matches_ball_count(cf12):
    # d(o, g o) <= r  <=>  ||g||^2 <= 2 cosh r  in SL2(R)
    # 2 cosh r = 101 and R^2 = 50.5 both select ||g||^2 <= 100 (norms are integers)
    v = star_count(cf12, 3, math.acosh(50.5))
    led = ball_count(cf12, 3, radii=[math.sqrt(50.5)])
    assert int(v.sum()) == int(led.totals[0])


def test_zaremba_examples():
    _, D = zaremba_sets([1, 2], 10)
    assert 3 in D
    N, _ = zaremba_sets([1, 2], 10)
    assert (2, 3) in N
    _, D = zaremba_sets([2, 3, 7], 7)
    assert {2, 3, 7} <= D


def test_zaremba_against_euclid_oracle():
    _, D = zaremba_sets([1, 2, 3, 4, 5], 500, fractions=False)
    assert D == zaremba_denominators([1, 2, 3, 4, 5], 500)


def test_zaremba_fibonacci():
    _, D = zaremba_sets([1], 1000, fractions=False)
    fib = [1, 2]
    while fib[-1] + fib[-2] <= 1000:
        fib.append(fib[-1] + fib[-2])
    assert D == set(fib)
    assert zaremba_density([1], 1000) < zaremba_density([1], 100)


def test_zaremba_density_edges():
    assert zaremba_density([1, 2], 1) in (0, 1)
    assert zaremba_density([2, 3], 1) == 0
    d3, d4 = zaremba_density([1, 2, 3, 4, 5], 1000), zaremba_density([1, 2, 3, 4, 5], 10_000)
    assert d4 >= d3 - 0.01
    with pytest.raises(DomainError):
        zaremba_density([1, GaussianInteger(2, 1)], 10)


def test_zaremba_gaussian_monotone_pruning():
    # pruned enumeration equals enumeration to a deep length cap, then filtering
    G = GaussianInteger
    alph = [G(1, 0), G(1, 1), G(2, -1)]
    _, D = zaremba_sets(alph, 60, fractions=False)
    qp, q = [G(0, 0)], [G(1, 0)]
    found = set()
    for _ in range(8):
        nqp, nq = [], []
        for x, y in zip(qp, q):
            for a in alph:
                z = x + a * y
                nqp.append(y)
                nq.append(z)
                if z.norm() <= 60:
                    found.add(z)
        qp, q = nqp, nq
    assert D == found

