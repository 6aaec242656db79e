"""Private label-prior estimation with the Laplace mechanism.

Each class count gets ``Lap(2/eps)`` noise, is clamped at zero, and the
clamped counts are normalized over classes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import PriorDistribution
from .errors import ConfigError, DataError
from .rng import RandomStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HistogramEstimate:
    raw_counts: np.ndarray
    perturbed: np.ndarray  # counts + noise, before clamping
    noisy_counts: np.ndarray
    scale: float


def laplace_scale(epsilon: float) -> float:
    """Noise scale for the class histogram; changing one label moves two counts by one."""
    if not epsilon > 0:
        raise ConfigError("NONPOSITIVE_EPSILON", f"epsilon={epsilon}")
    return 2.0 / epsilon


def laplace_inverse_cdf(u, scale: float):
    u = np.asarray(u, dtype=np.float64)
    c = u - 0.5
    return -scale * np.sign(c) * np.log1p(-2.0 * np.abs(c))


def sample_laplace(scale: float, stream: RandomStream, size: Optional[int] = None):
    """Zero-centred Laplace draw(s) by inverse CDF on the stream's uniforms."""
    if not scale > 0:
        raise ConfigError("NONPOSITIVE_SCALE", f"scale={scale}")
    n = 1 if size is None else int(size)
    x = laplace_inverse_cdf(stream.uniforms(n), scale)
    return float(x[0]) if size is None else x


def class_counts(labels: Sequence[int], k: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise DataError("LABEL_OUT_OF_RANGE", f"labels must lie in [0, {k})")
    return np.bincount(labels, minlength=k).astype(np.int64)


def _noisy_histogram(labels, epsilon: float, k: int, noise: Callable[[int, float], np.ndarray]) -> HistogramEstimate:
    counts = class_counts(labels, k)
    scale = laplace_scale(epsilon)
    perturbed = counts + noise(k, scale)
    return HistogramEstimate(counts, perturbed, np.maximum(perturbed, 0.0), scale)


def _normalize(noisy: np.ndarray) -> PriorDistribution:
    total = float(noisy.sum())
    if total <= 0.0:
        logger.warning("all noisy counts clamped to zero; falling back to the uniform prior")
        return PriorDistribution.uniform(noisy.size)
    return PriorDistribution(noisy / total)


def noisy_histogram(labels, epsilon: float, k: int, stream: RandomStream) -> HistogramEstimate:
    """Noise is drawn once per class in label order 0..k-1."""
    return _noisy_histogram(labels, epsilon, k, lambda n, b: sample_laplace(b, stream, size=n))


def estimate_prior(labels, epsilon: float, k: int, stream: RandomStream) -> PriorDistribution:
    return _normalize(noisy_histogram(labels, epsilon, k, stream).noisy_counts)


def prior_from_histogram(hist: HistogramEstimate) -> PriorDistribution:
    return _normalize(hist.noisy_counts)


def _estimate_prior_without_noise(labels, epsilon: float, k: int) -> PriorDistribution:
    # test hook: empirical histogram through the same clamp/normalize path
    return _normalize(_noisy_histogram(labels, epsilon, k, lambda n, b: np.zeros(n)).noisy_counts)
