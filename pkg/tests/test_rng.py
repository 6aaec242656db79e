import numpy as np
import pytest
from hypothesis import given, strategies as st

from blockrr.rng import RandomStream


def test_same_seed_same_sequence():
    a, b = RandomStream(123), RandomStream(123)
    assert np.array_equal(a.uniforms(1000), b.uniforms(1000))


def test_streams_differ_by_seed_and_id():
    base = RandomStream(1).uniforms(100)
    assert not np.array_equal(base, RandomStream(2).uniforms(100))
    assert not np.array_equal(base, RandomStream(1, "other").uniforms(100))
    assert not np.array_equal(RandomStream(1).child("a").uniforms(10), RandomStream(1).child("b").uniforms(10))


def test_random_access_matches_sequential():
    s = RandomStream(77)
    seq = s.uniforms(50)
    assert s.draw_index == 50
    assert np.array_equal(RandomStream(77).uniform_at(np.arange(50)), seq)
    shuffled = np.random.default_rng(0).permutation(50)
    assert np.array_equal(RandomStream(77).uniform_at(shuffled), seq[shuffled])


def test_string_ids_are_stable():
    s = RandomStream(5)
    u = s.uniform_at(np.array(["a", "b", "a"], dtype=object))
    assert u[0] == u[2] != u[1]
    assert s.draw_index == 0


@given(st.integers(0, 2**64 - 1))
def test_uniforms_in_open_unit_interval(seed):
    u = RandomStream(seed).uniforms(64)
    assert np.all((u > 0) & (u < 1))


def test_uniformity():
    u = RandomStream(2024).uniforms(10**6)
    assert abs(u.mean() - 0.5) < 0.002
    hist = np.bincount((u * 10).astype(int), minlength=10) / u.size
    assert np.max(np.abs(hist - 0.1)) < 0.002


def test_permutation():
    p = RandomStream(9).permutation(1000)
    assert sorted(p.tolist()) == list(range(1000))
    assert np.array_equal(p, RandomStream(9).permutation(1000))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_range(seed):
    with pytest.raises(ValueError):
        RandomStream(seed)
