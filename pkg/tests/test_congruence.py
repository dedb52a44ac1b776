import itertools
import math

import numpy as np
import pytest

from congcount.arithmetic import GaussianInteger
from congcount.congruence import (
    CyclicGroup,
    case_closed_forms,
    case_traces_match,
    cayley_gap,
    cycle_control,
    expander_report,
    generator_indices,
    project,
    quotient_group,
    return_trajectory_products,
    return_trajectory_set,
    sphere_containment_test,
    trace_field_witness,
    zariski_density_probe,
)
from congcount.errors import DomainError
from congcount.groups import GroupElement
from congcount.semigroup import cf_spec, example_schottky, word_to_element
from oracles import sl2_mod_size

G = GaussianInteger


def test_project_examples(cf12):
    assert project(cf12.identity(), 2) == (1, 0, 0, 1)
    assert project(GroupElement.sl2(1, 1, 1, 2), 2) == (1, 1, 1, 0)


def test_project_homomorphism(cf12):
    rng = np.random.default_rng(0)
    grp = quotient_group(cf12, 5)
    for _ in range(1000):
        a = tuple(int(v) for v in rng.integers(0, 4, 3))
        b = tuple(int(v) for v in rng.integers(0, 4, 3))
        ga, gb = word_to_element(a, cf12), word_to_element(b, cf12)
        assert grp.index_of(ga @ gb) == grp.multiply(grp.index_of(ga), grp.index_of(gb))


@pytest.mark.parametrize("q", [2, 3])
def test_quotient_sizes(cf12, q):
    assert quotient_group(cf12, q).size == sl2_mod_size(q)


def test_unit_modulus(cf12, gauss_spec):
    assert quotient_group(cf12, 1).size == 1
    assert quotient_group(gauss_spec, G(0, 1)).size == 1


def test_q2_identity_class(cf12):
    grp = quotient_group(cf12, 2)
    e = grp.index_of(cf12.identity())
    gidx = generator_indices(cf12, grp)
    assert gidx[3] == e                       # g_{2,2} = (1 2; 2 5) = I mod 2
    g11 = word_to_element((0,), cf12)
    assert grp.index_of(g11) != e and grp.index_of(g11 @ g11) != e
    assert grp.index_of(g11 @ g11 @ g11) == e


def test_return_trajectories(cf12):
    S = return_trajectory_set(cf12, 1, 0, 0)
    assert cf12.identity() in S
    assert len(return_trajectory_products(cf12, 1, 0, 0)) == 16


def _free_reduce(word):
    out = []
    for s in word:
        if out and out[-1] == (s[0], -s[1]):
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def test_schottky_return_set_against_free_reduction():
    spec = example_schottky(N1=0)
    words = list(itertools.product(range(2), repeat=2))
    reduced = {_free_reduce([(a, 1) for a in u] + [(b, -1) for b in reversed(v)]) for u in words for v in words}
    S = return_trajectory_set(spec, 2, 1, 1)
    assert len(S) == len(reduced)


def test_cayley_controls(cf12):
    grp = quotient_group(cf12, 3)
    full = cayley_gap(grp, range(grp.size))
    assert full["lambda2"] == pytest.approx(1.0, abs=1e-10)
    for n in (5, 8, 13):
        c = cycle_control(n)
        assert c["lambda2"] == pytest.approx(1 - math.cos(2 * math.pi / n), abs=1e-10)
    z = cayley_gap(CyclicGroup(6), [1, 5])
    assert z["lambda1"] == pytest.approx(0, abs=1e-12)


def test_expander_gap_positive(cf12):
    r = expander_report(cf12, 3, 1, 0, 0)
    assert r["lambda2"] > 0
    assert r["full_group_lambda2"] == pytest.approx(1.0, abs=1e-10)


def test_sphere_test():
    t = np.array([0.1, 1.3, 2.9, 4.4])
    assert sphere_containment_test(np.column_stack([np.cos(t), np.sin(t)]))
    assert not sphere_containment_test(np.array([[0, 0], [1, 0], [0, 1], [0.3, 0.7]]))
    assert sphere_containment_test(np.array([[0, 0], [1, 1], [2, 2], [3, 3]]))
    with pytest.raises(DomainError):
        sphere_containment_test(np.array([[0, 0], [1, 1]]))


def test_zariski_probe(cf12, schottky):
    assert zariski_density_probe(cf12, 1, 0, 0)["status"] == "density witnessed"
    assert zariski_density_probe(schottky, 2, 1, 1)["status"] == "density witnessed"


def test_trace_witness_case1():
    spec = cf_spec([G(1, 1), 2])
    w = trace_field_witness(spec, 1, 0, 0)
    assert w["case"] == "case1"
    assert w["trace"] == G(2, -2)
    assert w["element"].trace() == G(2, -2)


def test_trace_witness_conjugate_pair():
    spec = cf_spec([G(1, 1), G(1, -1)])
    with pytest.raises(DomainError, match="p >= 2"):
        trace_field_witness(spec, 1, 0, 0)
    w = trace_field_witness(spec, 2, 0, 0)
    assert w["case"] == "case4"
    assert w["trace"].im != 0
    a, b = G(1, 1), G(1, -1)
    # 2 a^3 b - a^4 has imaginary part 8 r^4 sin^3 cos = 8 for a = 1 + i
    assert (a ** 3 * b * 2 - a ** 4).im == 8


def test_case_formulas_random_pairs():
    rng = np.random.default_rng(4)
    for _ in range(100):
        v = [int(x) for x in rng.integers(-5, 6, 4)]
        assert case_traces_match(G(v[0], v[1]), G(v[2], v[3]))
    forms = case_closed_forms(G(1, 1), G(2, 0))
    assert forms["case1"] == G(2, -2)
