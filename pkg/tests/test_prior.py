import logging
import math

import numpy as np
import pytest

from blockrr.errors import ConfigError, DataError
from blockrr.prior import (
    _estimate_prior_without_noise,
    _noisy_histogram,
    _normalize,
    estimate_prior,
    laplace_inverse_cdf,
    laplace_scale,
    noisy_histogram,
    sample_laplace,
)
from blockrr.rng import RandomStream


def test_median_draw_is_zero():
    assert laplace_inverse_cdf(0.5, 3.0) == 0.0


def test_inverse_cdf_matches_closed_form_cdf():
    b = 1.7
    x = np.linspace(-10, 10, 101)
    cdf = np.where(x < 0, 0.5 * np.exp(x / b), 1 - 0.5 * np.exp(-x / b))
    np.testing.assert_allclose(laplace_inverse_cdf(cdf, b), x, atol=1e-9)


def test_variance_at_scale_two():
    x = sample_laplace(2.0, RandomStream(11), size=10**6)
    assert abs(x.var() - 8.0) <= 0.05 * 8.0
    assert abs(np.mean(x > 0) - 0.5) <= 0.002


@pytest.mark.parametrize("eps", [0.5, 1.0, 4.0])
def test_scale_is_two_over_epsilon(eps):
    assert laplace_scale(eps) == 2.0 / eps
    hist = noisy_histogram(np.zeros(1, dtype=int), eps, 1, RandomStream(1))
    assert hist.scale == 2.0 / eps


def test_bad_scale_and_epsilon():
    with pytest.raises(ConfigError) as exc:
        sample_laplace(0.0, RandomStream(0))
    assert exc.value.code == "NONPOSITIVE_SCALE"
    with pytest.raises(ConfigError):
        laplace_scale(0.0)


def test_zero_noise_hook_reproduces_histogram():
    p = _estimate_prior_without_noise([0, 0, 1, 1, 1], 1.0, 2)
    assert p.probs.tolist() == [0.4, 0.6]


def test_deterministic_under_seed():
    labels = np.random.default_rng(0).integers(0, 5, 400)
    a = estimate_prior(labels, 1.0, 5, RandomStream(8))
    b = estimate_prior(labels, 1.0, 5, RandomStream(8))
    assert a.probs.tobytes() == b.probs.tobytes()


def test_noise_is_unbiased():
    labels = np.array([0] * 100 + [1] * 50)
    stream = RandomStream(31)
    perturbed = np.array([noisy_histogram(labels, 1.0, 2, stream).perturbed for _ in range(10**4)])
    bound = 3 * 2.0 / math.sqrt(10**4)
    # Laplace sd is sqrt(2)*b; the 3*(2/eps)/sqrt(n) band is about 2.1 standard errors
    assert np.all(np.abs(perturbed.mean(axis=0) - [100, 50]) <= bound)


def test_output_is_valid_and_clamped():
    stream = RandomStream(4)
    for _ in range(200):
        hist = noisy_histogram([0, 1, 2, 2], 0.3, 4, stream)
        assert np.all(hist.noisy_counts >= 0)
        p = _normalize(hist.noisy_counts)
        assert abs(p.probs.sum() - 1) <= 1e-12 and np.all(p.probs >= 0)


def test_normalization_invariant_to_rescaling():
    counts = np.array([3.0, 0.0, 1.5, 7.25])
    np.testing.assert_allclose(_normalize(counts).probs, _normalize(counts * 13.0).probs, rtol=1e-15)


def test_all_clamped_falls_back_to_uniform(caplog):
    hist = _noisy_histogram([0, 1], 1.0, 3, lambda n, b: np.full(n, -10.0))
    with caplog.at_level(logging.WARNING):
        p = _normalize(hist.noisy_counts)
    assert p.probs.tolist() == [1 / 3] * 3
    assert "uniform" in caplog.text


def test_label_out_of_range():
    with pytest.raises(DataError) as exc:
        estimate_prior([0, 3], 1.0, 3, RandomStream(0))
    assert exc.value.code == "LABEL_OUT_OF_RANGE"
