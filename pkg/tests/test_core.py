import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockrr.core import (
    BlockMapping,
    LabelSpace,
    MechanismMatrix,
    PartitionConfig,
    PriorDistribution,
    RegressionMechanismConfig,
    derive_output_partition,
    validate_config,
)
from blockrr.errors import ConfigError, MalformedMatrixError
from blockrr import unify

LN2 = math.log(2)


def test_four_label_config_is_valid():
    cfg = PartitionConfig.make(4, [0, 1], LN2, l=1)
    assert validate_config(cfg).ok
    assert cfg.s2 == {2, 3} and cfg.delta == {0}


def test_rr_config_is_valid():
    cfg = PartitionConfig.make(10, range(10), 1.0)
    res = validate_config(cfg)
    assert res.ok and cfg.s2 == frozenset() and cfg.s_tilde2 == frozenset()


def test_overlapping_partition_rejected():
    cfg = PartitionConfig.make(2, [0], 1.0)
    bad = PartitionConfig(cfg.space, frozenset({0}), frozenset({0, 1}), cfg.s_tilde, cfg.s_tilde1,
                          cfg.s_tilde2, frozenset(), 0, 1.0, cfg.mapping)
    assert validate_config(bad).error == "OVERLAPPING_PARTITION"
    with pytest.raises(ConfigError) as exc:
        validate_config(bad).raise_for_error()
    assert exc.value.code == "OVERLAPPING_PARTITION"


@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_bad_epsilon(eps):
    assert validate_config(PartitionConfig.make(3, [0], eps)).error == "NONPOSITIVE_EPSILON"


def test_delta_out_of_range():
    cfg = PartitionConfig.make(4, [0, 1], 1.0, l=1, delta=[2])
    assert validate_config(cfg).error == "DELTA_OUT_OF_RANGE"
    cfg = PartitionConfig.make(4, [0, 1], 1.0, l=3)
    assert validate_config(cfg).error == "DELTA_OUT_OF_RANGE"


def test_inconsistent_output_partition():
    cfg = PartitionConfig.make(4, [0, 1], 1.0)
    bad = PartitionConfig(cfg.space, cfg.s1, cfg.s2, cfg.s_tilde, frozenset({0}), frozenset({1, 2, 3}),
                          frozenset(), 0, 1.0, cfg.mapping)
    assert validate_config(bad).error == "INCONSISTENT_OUTPUT_PARTITION"


def test_block_straddling_outputs_rejected():
    # B(1) = {1, 2} reaches into S~1 from an S2 label
    mapping = BlockMapping({0: [0, 1], 1: [1, 2], 2: [2, 3], 3: [3, 0]})
    cfg = PartitionConfig.make(4, [0], 1.0, mapping=mapping)
    assert validate_config(cfg).error == "INCONSISTENT_OUTPUT_PARTITION"


def test_empty_output_block_needs_full_delta():
    cfg = PartitionConfig.make(4, [0, 1], 1.0, l=1, s_tilde=[0, 1])
    assert validate_config(cfg).error == "EMPTY_OUTPUT_WITH_NONEMPTY_SOURCE"
    assert validate_config(cfg.with_l(2)).ok


def test_derive_output_partition_identity():
    ident = BlockMapping.identity(4)
    assert derive_output_partition({0, 1}, {2, 3}, set(range(4)), ident) == ({0, 1}, {2, 3})
    assert derive_output_partition(set(range(4)), set(), set(range(4)), ident) == (set(range(4)), set())


def test_derive_output_partition_cyclic_blocks():
    mapping = BlockMapping({y: [y, (y + 1) % 4] for y in range(4)})
    assert derive_output_partition({0}, {1, 2, 3}, set(range(4)), mapping) == ({0, 1}, {2, 3})


def test_mapping_requires_self_membership_and_equal_sizes():
    with pytest.raises(ConfigError) as exc:
        BlockMapping({0: [1], 1: [1]})
    assert exc.value.code == "INVALID_MAPPING"
    with pytest.raises(ConfigError):
        BlockMapping({0: [0], 1: [1, 0]})


def test_contiguous_blocks():
    m = BlockMapping.contiguous_blocks(6, 3)
    assert m(4) == {3, 4, 5} and m.block_size == 3


@pytest.mark.parametrize("k", range(2, 11))
def test_unifying_configs_validate(k):
    eps = 1.0
    assert validate_config(unify.rr_config(k, eps)).ok
    assert validate_config(unify.rr_two_block_config(k, range(k // 2), eps)).ok
    prior = PriorDistribution.from_counts(np.arange(k, 0, -1))
    assert validate_config(unify.rrwithprior_config(prior, eps)).ok
    for m in (d for d in range(1, k + 1) if k % d == 0):
        assert validate_config(unify.rronbins_config(k, m, eps)).ok
        assert validate_config(unify.rronbins_config(k, m, eps, s1_bins=range(max(1, m // 2)))).ok


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 12).flatmap(lambda k: st.tuples(st.just(k), st.sets(st.integers(0, k - 1)))))
def test_partition_closure(data):
    k, s1 = data
    cfg = PartitionConfig.make(k, s1, 1.0)
    assert cfg.s_tilde1 | cfg.s_tilde2 == cfg.s_tilde
    assert not cfg.s_tilde1 & cfg.s_tilde2


def test_config_json_round_trip():
    cfg = PartitionConfig.make(6, [0, 1, 2], 0.7, l=2, mapping=BlockMapping.contiguous_blocks(6, 3))
    again = PartitionConfig.from_dict(cfg.to_dict())
    assert again == cfg
    d = cfg.to_dict()
    assert d["s1"] == sorted(d["s1"]) and d["delta"] == [0, 1]


def test_label_space_names():
    space = LabelSpace.from_names(["cat", "dog", "ant"])
    assert space.k == 3
    assert space.decode(space.encode("dog")) == "dog"


def test_matrix_validation():
    with pytest.raises(MalformedMatrixError):
        MechanismMatrix((0, 1), (0, 1), np.array([[0.5, 0.5], [0.7, 0.2]]))
    with pytest.raises(MalformedMatrixError):
        MechanismMatrix((0, 1), (0, 1), np.array([[1.5, -0.5], [0.5, 0.5]]))
    with pytest.raises(MalformedMatrixError):
        MechanismMatrix((0,), (0, 1), np.array([[0.5, 0.5], [0.5, 0.5]]))
    m = MechanismMatrix((0, 1), (0, 1), np.array([[0.25, 0.75], [0.5, 0.5]]))
    assert MechanismMatrix.from_dict(m.to_dict()).entry(0, 1) == 0.75
    with pytest.raises(ConfigError) as exc:
        m.row(7)
    assert exc.value.code == "LABEL_OUT_OF_RANGE"


def test_matrix_json_round_trip_is_exact():
    rng = np.random.default_rng(5)
    p = rng.dirichlet(np.ones(5), size=5)
    m = MechanismMatrix(tuple(range(5)), tuple(range(5)), p)
    import json

    again = MechanismMatrix.from_dict(json.loads(json.dumps(m.to_dict())))
    assert np.array_equal(again.p, m.p)


def test_prior_validation():
    with pytest.raises(ConfigError):
        PriorDistribution(np.array([0.5, 0.6]))
    with pytest.raises(ConfigError):
        PriorDistribution(np.array([1.2, -0.2]))
    assert PriorDistribution.from_counts([1, 3]).probs.tolist() == [0.25, 0.75]


def test_regression_config():
    cfg = RegressionMechanismConfig(0.0, 1.0, 0.1, LN2)
    assert cfg.gamma_rp == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(ConfigError):
        RegressionMechanismConfig(1.0, 0.0, 0.1, 1.0)
    with pytest.raises(ConfigError):
        RegressionMechanismConfig(0.0, 1.0, 0.0, 1.0)
    bins = RegressionMechanismConfig(0.0, 1.0, 0.1, 1.0, bin_count=4)
    assert bins.bin_representatives.tolist() == [0.125, 0.375, 0.625, 0.875]
    assert bins.bin_index([-3.0, 0.3, 0.99, 5.0]).tolist() == [0, 1, 3, 3]
