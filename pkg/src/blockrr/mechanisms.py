"""BlockRR and the RR-type mechanisms it unifies.

All ``build_*`` functions return a :class:`MechanismMatrix`; sampling is
inverse-CDF over a row in output-label order, driven by a
:class:`~blockrr.rng.RandomStream`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    BetaGamma,
    MechanismMatrix,
    PartitionConfig,
    PriorDistribution,
    RegressionMechanismConfig,
    top_labels,
    validate_config,
)
from .errors import ConfigError
from .rng import RandomStream


def closed_form_beta_gamma(epsilon: float, block_size: int, n1: int, n2: int, l: int) -> BetaGamma:
    """Closed-form solution of the two normalization equations.

    ``n1``/``n2`` are the sizes of the two output blocks, ``l`` the size of
    Delta.  With ``a = (e^eps - 1)|B|`` and ``n = n1 + n2``::

        beta1  = a + l n2 / n
        gamma1 = a + l - (l / n)(a + n1)
        kappa  = (a + n1)(a + n2) - (n1 - l) n2
    """
    a = math.expm1(epsilon) * block_size
    n = n1 + n2
    beta1 = a + l * n2 / n
    gamma1 = (a + l) - (l / n) * (a + n1)
    kappa = (a + n1) * (a + n2) - (n1 - l) * n2
    assert kappa > 0, "kappa must be positive for epsilon > 0"
    return BetaGamma(beta1 / kappa, gamma1 / kappa, beta1, gamma1, kappa)


def solve_beta_gamma(config: PartitionConfig) -> BetaGamma:
    validate_config(config).raise_for_error()
    return closed_form_beta_gamma(
        config.epsilon, config.mapping.block_size, len(config.s_tilde1), len(config.s_tilde2), config.l
    )


def normalization_residuals(config: PartitionConfig, bg: BetaGamma) -> tuple:
    """Residuals of the S1-row and S2-row normalization equations."""
    b = config.mapping.block_size
    e = math.exp(config.epsilon)
    n1, n2, n = len(config.s_tilde1), len(config.s_tilde2), len(config.s_tilde)
    r1 = (e * b + n1 - b) * bg.beta + n2 * bg.gamma - 1.0
    r2 = (n1 - config.l) * bg.beta + (e * b + n2 - b) * bg.gamma - (1.0 - config.l / n)
    return r1, r2


def build_blockrr_matrix(config: PartitionConfig) -> MechanismMatrix:
    bg = solve_beta_gamma(config)
    e = math.exp(config.epsilon)
    outs = config.output_labels
    n = len(outs)
    col = {yt: j for j, yt in enumerate(outs)}
    in_block = np.zeros((config.k, n), dtype=bool)
    for y in range(config.k):
        in_block[y, [col[b] for b in config.mapping(y) if b in col]] = True
    in_st1 = np.isin(outs, list(config.s_tilde1))
    in_delta = np.isin(outs, list(config.delta))
    is_s1 = np.isin(np.arange(config.k), list(config.s1))[:, None]

    s1_rows = np.where(~in_st1, bg.gamma, np.where(in_block, e * bg.beta, bg.beta))
    s2_rows = np.where(
        in_delta, 1.0 / n,
        np.where(in_st1, bg.beta, np.where(in_block, e * bg.gamma, bg.gamma)),
    )
    p = np.where(is_s1, s1_rows, s2_rows)
    return MechanismMatrix(tuple(range(config.k)), outs, p)


def _inverse_cdf(row: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(row)
    return np.minimum(np.searchsorted(cdf, u, side="right"), row.size - 1)


def sample_labels(labels, matrix: MechanismMatrix, uniforms) -> np.ndarray:
    """Vectorized inverse-CDF sampling: one uniform per input label."""
    labels = np.asarray(labels, dtype=np.int64)
    u = np.asarray(uniforms, dtype=np.float64)
    out = np.empty(labels.shape, dtype=np.int64)
    outs = np.asarray(matrix.output_labels, dtype=np.int64)
    known = np.isin(labels, matrix.input_labels)
    if not np.all(known):
        bad = labels[~known][0]
        raise ConfigError("LABEL_OUT_OF_RANGE", f"label {bad} is not an input label")
    for i, y in enumerate(matrix.input_labels):
        mask = labels == y
        if mask.any():
            out[mask] = outs[_inverse_cdf(matrix.p[i], u[mask])]
    return out


def sample_label(y: int, matrix: MechanismMatrix, stream: RandomStream) -> int:
    row = matrix.row(y)
    return matrix.output_labels[int(_inverse_cdf(row, np.array([stream.uniform()]))[0])]


def build_rr_matrix(k: int, epsilon: float) -> MechanismMatrix:
    if not epsilon > 0:
        raise ConfigError("NONPOSITIVE_EPSILON", f"epsilon={epsilon}")
    if k < 1:
        raise ConfigError("INVALID_LABEL_SET", "k must be positive")
    e = math.exp(epsilon)
    denom = e + k - 1
    p = np.full((k, k), 1.0 / denom)
    np.fill_diagonal(p, e / denom)
    return MechanismMatrix(tuple(range(k)), tuple(range(k)), p)


@dataclass(frozen=True)
class TopKSelection:
    k: int
    y_k: frozenset
    objective: float


def choose_topk(prior: PriorDistribution, epsilon: float) -> TopKSelection:
    """Pick k maximizing ``e^eps / (e^eps + k - 1) * (mass of the top k)``.

    Ties go to the smaller k; the top-k set breaks ties by ascending label.
    """
    e = math.exp(epsilon)
    order = sorted(range(prior.k), key=lambda j: (-float(prior[j]), j))
    best_k, best_obj, mass = 1, -math.inf, 0.0
    for k in range(1, prior.k + 1):
        mass += float(prior[order[k - 1]])
        obj = e / (e + k - 1) * mass
        if obj > best_obj:
            best_k, best_obj = k, obj
    return TopKSelection(best_k, frozenset(order[:best_k]), best_obj)


def build_rrwithprior_matrix(prior: PriorDistribution, epsilon: float) -> MechanismMatrix:
    if not epsilon > 0:
        raise ConfigError("NONPOSITIVE_EPSILON", f"epsilon={epsilon}")
    sel = choose_topk(prior, epsilon)
    outs = tuple(sorted(sel.y_k))
    e = math.exp(epsilon)
    k = sel.k
    p = np.empty((prior.k, k))
    for y in range(prior.k):
        if y in sel.y_k:
            p[y] = 1.0 / (e + k - 1)
            p[y, outs.index(y)] = e / (e + k - 1)
        else:
            p[y] = 1.0 / k
    return MechanismMatrix(tuple(range(prior.k)), outs, p)


def build_rronbins_matrix(config: RegressionMechanismConfig, values: Optional[Sequence[float]] = None) -> MechanismMatrix:
    """RR over bin indices ``0..bin_count-1``.

    Row ``i`` is for ``values[i]`` (default: the bin representatives, giving a
    square matrix).  The representative of output bin ``j`` is
    ``config.bin_representatives[j]``.
    """
    if not config.bin_count or config.bin_count < 1:
        raise ConfigError("EMPTY_BINS", "bin_count must be at least 1")
    m = config.bin_count
    vals = config.bin_representatives if values is None else np.asarray(values, dtype=float)
    target = config.bin_index(vals)
    e = math.exp(config.epsilon)
    p = np.full((vals.size, m), 1.0 / (e + m - 1))
    p[np.arange(vals.size), target] = e / (e + m - 1)
    return MechanismMatrix(tuple(range(vals.size)), tuple(range(m)), p)


def _neighbourhood(y: float, config: RegressionMechanismConfig) -> tuple:
    lo, hi = config.support
    return max(y - config.delta_width, lo), min(y + config.delta_width, hi)


def rpwithprior_density(y: float, y_tilde, config: RegressionMechanismConfig):
    """Conditional density of the privatized value given the true value ``y``.

    Vectorized over ``y_tilde``; returns a float for scalar input.
    """
    yt = np.asarray(y_tilde, dtype=np.float64)
    lo, hi = config.support
    inside_support = (yt >= lo) & (yt <= hi)
    if config.interval_lo <= y <= config.interval_hi:
        a, b = _neighbourhood(y, config)
        near = (yt >= a) & (yt <= b)
        g = config.gamma_rp
        out = np.where(near, 1.0 / g, np.where(inside_support, math.exp(-config.epsilon) / g, 0.0))
    else:
        out = np.where(inside_support, 1.0 / (hi - lo), 0.0)
    return float(out) if out.ndim == 0 else out


def sample_rpwithprior(y: float, config: RegressionMechanismConfig, stream: RandomStream, size: Optional[int] = None):
    """Two-stage draw: pick the region by its mass, then uniform inside it."""
    n = 1 if size is None else int(size)
    u = stream.uniforms(2 * n).reshape(n, 2)
    lo, hi = config.support
    if config.interval_lo <= y <= config.interval_hi:
        a, b = _neighbourhood(y, config)
        near_len = b - a
        far_len = (hi - lo) - near_len
        p_near = near_len / (near_len + math.exp(-config.epsilon) * far_len)
        t = u[:, 1] * far_len
        left = a - lo
        far = np.where(t < left, lo + t, b + (t - left))
        out = np.where(u[:, 0] < p_near, a + u[:, 1] * near_len, far)
    else:
        out = lo + u[:, 1] * (hi - lo)
    return float(out[0]) if size is None else out
