import math
from fractions import Fraction

import numpy as np
import pytest

from blockrr.core import MechanismMatrix, PartitionConfig, PriorDistribution, RegressionMechanismConfig
from blockrr.errors import ConfigError, MalformedMatrixError
from blockrr.mechanisms import build_blockrr_matrix, build_rr_matrix
from blockrr.rng import RandomStream
from blockrr.verifier import (
    check_label_dp,
    check_lp_conditions,
    check_monotonicity,
    check_rpwithprior_density,
    check_unification,
    column_ratios,
    empirical_transition,
    random_valid_config,
)
from oracles import brute_force_max_ratio, exact_blockrr

LN2 = math.log(2)


def four_label():
    cfg = PartitionConfig.make(4, [0, 1], LN2, l=1)
    return cfg, build_blockrr_matrix(cfg)


def perturbed(m, i, j, delta):
    p = m.p.copy()
    p[i, j] += delta
    p[i] /= p[i].sum()
    return MechanismMatrix(m.input_labels, m.output_labels, p)


# ---- label DP --------------------------------------------------------------

def test_four_label_ratio_is_two():
    _, m = four_label()
    report = check_label_dp(m, LN2)
    assert report.dp_pass
    assert report.max_ratio == pytest.approx(2.0, rel=1e-14)
    table = exact_blockrr(4, [0, 1], 2, 1)
    exact = [[table[y][yt] for yt in range(4)] for y in range(4)]
    assert brute_force_max_ratio(exact) == Fraction(2)


@pytest.mark.parametrize("eps", [0.0, 0.1, 3.0])
def test_uniform_matrix_passes(eps):
    m = MechanismMatrix((0, 1, 2), (0, 1, 2), np.full((3, 3), 1 / 3))
    report = check_label_dp(m, eps)
    assert report.dp_pass and report.max_ratio == 1.0


def test_scaled_diagonal_fails():
    _, m = four_label()
    bad = m.p.copy()
    bad[0, 0] *= 1.5
    bad[0] /= bad[0].sum()
    report = check_label_dp(MechanismMatrix(m.input_labels, m.output_labels, bad), LN2)
    assert not report.dp_pass and report.max_ratio > 2


def test_mixed_zero_column_is_infinite():
    m = MechanismMatrix((0, 1), (0, 1), np.array([[1.0, 0.0], [0.5, 0.5]]))
    assert np.isinf(column_ratios(m)[1])
    assert not check_label_dp(m, 10.0).dp_pass


def test_all_zero_column_skipped():
    m = MechanismMatrix((0, 1), (0, 1, 2), np.array([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0]]))
    assert check_label_dp(m, 0.0).dp_pass


def test_rejects_non_matrix():
    with pytest.raises(MalformedMatrixError):
        check_label_dp(np.eye(2), 1.0)


def test_soundness_on_random_configs():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        cfg = random_valid_config(rng)
        report = check_label_dp(build_blockrr_matrix(cfg), cfg.epsilon)
        assert report.dp_pass, cfg.to_dict()
        assert report.max_ratio <= math.exp(cfg.epsilon) * (1 + 1e-9)


def test_agrees_with_brute_force_on_perturbations():
    rng = np.random.default_rng(6)
    for _ in range(60):
        cfg = random_valid_config(rng, max_k=6)
        cfg = PartitionConfig.from_dict({**cfg.to_dict(), "epsilon": LN2})
        m = build_blockrr_matrix(cfg)
        for i in range(m.p.shape[0]):
            for j in range(m.p.shape[1]):
                for d in (0.05, -0.05):
                    if m.p[i, j] + d < 0:
                        continue
                    pm = perturbed(m, i, j, d)
                    truth = brute_force_max_ratio(pm.p.tolist()) <= 2 * (1 + 1e-9)
                    assert check_label_dp(pm, LN2).dp_pass == truth


def test_detects_every_perturbation_past_a_tight_column():
    # raising a column maximum or lowering a column minimum of a column already
    # at ratio e^eps must be flagged
    rng = np.random.default_rng(13)
    checked = 0
    for _ in range(200):
        cfg = random_valid_config(rng)
        cfg = PartitionConfig.from_dict({**cfg.to_dict(), "epsilon": LN2})
        m = build_blockrr_matrix(cfg)
        ratios = column_ratios(m)
        for j in np.flatnonzero(np.isclose(ratios, 2.0)):
            col = m.p[:, j]
            for i in range(col.size):
                if np.isclose(col[i], col.max()):
                    assert not check_label_dp(perturbed(m, i, j, 0.05), LN2).dp_pass
                    checked += 1
                if np.isclose(col[i], col.min()) and col[i] > 0.05:
                    assert not check_label_dp(perturbed(m, i, j, -0.05), LN2).dp_pass
                    checked += 1
    assert checked > 1000


# ---- monotonicity ----------------------------------------------------------

def test_four_label_sweep():
    cfg, _ = four_label()
    rep = check_monotonicity(cfg)
    assert rep.passed
    np.testing.assert_allclose(rep.betas, [1 / 5, 3 / 14, 2 / 9], rtol=1e-14)
    np.testing.assert_allclose(rep.gammas, [1 / 5, 5 / 28, 1 / 6], rtol=1e-14)
    assert int(np.argmin(rep.gammas)) == len(cfg.s_tilde1)


def test_monotonicity_on_random_configs():
    rng = np.random.default_rng(4)
    seen = 0
    while seen < 500:
        cfg = random_valid_config(rng)
        if not cfg.s_tilde2:
            continue
        rep = check_monotonicity(cfg)
        assert rep.passed, cfg.to_dict()
        assert rep.betas[0] == pytest.approx(rep.gammas[0], rel=1e-12)
        assert int(np.argmin(rep.gammas)) == len(rep.ls) - 1
        seen += 1


# ---- unification -----------------------------------------------------------

def test_rr_single_and_two_block():
    assert check_unification("RR", k=10, epsilon=1.0, blocks=1).max_abs_diff == 0.0
    res = check_unification("RR", k=10, epsilon=1.0, blocks=2, s1=[0, 3, 4])
    assert res.passed


def test_rrwithprior_example():
    res = check_unification("RRWithPrior", prior=[0.7, 0.2, 0.1], epsilon=LN2)
    assert res.passed and res.details["k"] == 1


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("k", range(2, 11))
def test_unification_grid(k, eps):
    rng = np.random.default_rng(k)
    assert check_unification("RR", k=k, epsilon=eps, blocks=1).passed
    assert check_unification("RR", k=k, epsilon=eps, blocks=2).passed
    prior = PriorDistribution(rng.dirichlet(np.ones(k)))
    assert check_unification("RRWithPrior", prior=prior, epsilon=eps).passed
    for m in (d for d in range(1, k + 1) if k % d == 0):
        assert check_unification("RRonBins", k=k, bin_count=m, epsilon=eps, blocks=1).passed
        if m > 1:
            assert check_unification("RRonBins", k=k, bin_count=m, epsilon=eps, blocks=2).passed


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0, 4.0])
def test_rpwithprior_grid(eps):
    res = check_unification("RPWithPrior-discretized", epsilon=eps, step=1e-3)
    assert res.passed
    assert res.details["near_mass_gap"] <= res.details["gap_bound"]


def test_unknown_mechanism():
    with pytest.raises(ConfigError) as exc:
        check_unification("Staircase", epsilon=1.0)
    assert exc.value.code == "UNKNOWN_MECHANISM"


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("y", [0.0, 0.03, 0.5, 1.0, 1.5])
def test_density_identities(eps, y):
    rep = check_rpwithprior_density(RegressionMechanismConfig(0.0, 1.0, 0.1, eps), y)
    assert rep.passed and rep.normalization_error <= 1e-9


# ---- LP conditions ---------------------------------------------------------

def test_four_label_lp():
    cfg, m = four_label()
    rep = check_lp_conditions(m, cfg)
    assert rep.feasible and rep.boundary_tight
    assert rep.boundary_residual <= 1e-12 and rep.chain_residual <= 1e-12


def test_delta_entry_violation():
    cfg, m = four_label()
    p = m.p.copy()
    # move 0.05 of row 2 onto its Delta entry (0.25 -> 0.3)
    p[2, 0] += 0.05
    p[2, 2] -= 0.05
    rep = check_lp_conditions(MechanismMatrix(m.input_labels, m.output_labels, p), cfg)
    assert not rep.delta_uniform and not rep.passed


def test_rr_lp_with_empty_delta():
    cfg = PartitionConfig.make(5, range(5), 1.0)
    rep = check_lp_conditions(build_rr_matrix(5, 1.0), cfg)
    assert rep.passed


def test_lp_on_random_configs():
    rng = np.random.default_rng(10)
    for _ in range(500):
        cfg = random_valid_config(rng)
        rep = check_lp_conditions(build_blockrr_matrix(cfg), cfg)
        assert rep.passed, (cfg.to_dict(), rep.notes)


# ---- empirical -------------------------------------------------------------

def test_empirical_four_label():
    _, m = four_label()
    rep = empirical_transition(m, 10**6, RandomStream(1))
    assert rep.max_tv <= 0.01


def test_empirical_deterministic_rows():
    m = MechanismMatrix((0, 1), (0, 1), np.eye(2))
    assert empirical_transition(m, 1000, RandomStream(0)).max_tv == 0.0


def test_empirical_needs_draws():
    _, m = four_label()
    with pytest.raises(ConfigError) as exc:
        empirical_transition(m, 0, RandomStream(0))
    assert exc.value.code == "NONPOSITIVE_N"
