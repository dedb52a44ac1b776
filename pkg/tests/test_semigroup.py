import itertools

import numpy as np
import pytest

from congcount.arithmetic import GaussianInteger
from congcount.errors import DomainError
from congcount.groups import GroupElement, frobenius_norm_sq
from congcount.semigroup import (
    cf_spec,
    count_admissible,
    enumerate_words,
    example_schottky,
    find_trim_epsilon,
    is_admissible,
    schottky_from_sl2,
    spec_from_json,
    validate_ping_pong,
    word_to_element,
    words_of_length,
)


def test_schottky_admissibility(schottky):
    # 0-based: symbol j + N0 is the inverse of symbol j
    assert not is_admissible((1, 3), schottky)
    assert not is_admissible((0, 2), schottky)
    assert is_admissible((0, 1, 0, 3), schottky)
    assert is_admissible((), schottky)


def test_cf_free_shift(cf12):
    for w in itertools.product(range(4), repeat=3):
        assert is_admissible(w, cf12)
    with pytest.raises(DomainError):
        is_admissible((4,), cf12)


def test_trim_epsilon():
    eps = find_trim_epsilon([1, 2])
    assert 0 < eps < 1
    with pytest.raises(DomainError):
        find_trim_epsilon([1])


def test_disks_in_half_plane():
    for alph in ([1, 2], [1, 2, GaussianInteger(1, 1)]):
        spec = cf_spec(alph)
        t = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
        for d in spec.disks:
            pts = complex(d.center) + d.radius * np.exp(1j * t)
            assert (pts.real >= spec.epsilon - 1e-12).all()


def test_ping_pong_reports(cf12, schottky):
    assert validate_ping_pong(cf12)["ok"]
    assert validate_ping_pong(schottky)["ok"]
    g1 = GroupElement.sl2(3, 4, 2, 3)
    bad = schottky_from_sl2([g1, g1])
    rep = validate_ping_pong(bad)
    assert not rep["ok"]
    assert any("disks 0 and 1" in v for v in rep["violations"])


def test_word_to_element(cf12):
    assert word_to_element((), cf12) == cf12.identity()
    # symbol 1 is the block (1, 2): g_1 g_2 = (1 2; 1 3), 2/3 = [1, 2]
    g = word_to_element((1,), cf12)
    assert g.m == ((1, 2), (1, 3))
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = tuple(int(v) for v in rng.integers(0, 4, 5))
        k = int(rng.integers(0, 6))
        assert word_to_element(w, cf12) == word_to_element(w[:k], cf12) @ word_to_element(w[k:], cf12)


def test_enumeration_counts(cf12):
    words = [w for w, _ in enumerate_words(cf12, max_length=2)]
    assert sum(1 for w in words if len(w) == 2) == 16
    assert len(words) == 21


@pytest.mark.parametrize("N1", [0, 2])
def test_schottky_counts_match_transition_powers(N1):
    spec = example_schottky(N1=N1)
    A = spec.transition.astype(np.int64)
    for k in range(1, 5):
        expected = int(np.ones(spec.N) @ np.linalg.matrix_power(A, k - 1) @ np.ones(spec.N))
        assert count_admissible(spec, k) == expected
        assert sum(1 for _ in words_of_length(spec, k)) == expected


@pytest.mark.parametrize("which", ["cf", "gauss", "schottky"])
def test_norm_bounded_enumeration_matches_filter(which, cf12, gauss_spec, schottky):
    spec = {"cf": cf12, "gauss": gauss_spec, "schottky": schottky}[which]
    bound = {"cf": 400, "gauss": 60, "schottky": 20000}[which]
    fast = {w for w, _ in enumerate_words(spec, max_norm_sq=bound)}
    longest = max(len(w) for w in fast)
    slow = {w for w, g in enumerate_words(spec, max_length=longest + 2) if frobenius_norm_sq(g) <= bound}
    assert fast == slow


def test_spec_json_roundtrip(cf12, schottky):
    for spec in (cf12, schottky):
        again = spec_from_json(spec.to_json())
        assert [g for g in again.generators] == [g for g in spec.generators]
