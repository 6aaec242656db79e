"""BlockRR configurations that reproduce the baseline mechanisms.

Each builder returns a :class:`PartitionConfig`; feeding it to
:func:`~blockrr.mechanisms.build_blockrr_matrix` yields the corresponding
baseline (RRonBins after summing output columns per bin, RPWithPrior on a
grid).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import BlockMapping, MechanismMatrix, PartitionConfig, PriorDistribution, RegressionMechanismConfig
from .errors import ConfigError
from .mechanisms import choose_topk, rpwithprior_density


def rr_config(k: int, epsilon: float) -> PartitionConfig:
    """S1 = S, S2 = {}, identity blocks."""
    return PartitionConfig.make(k, range(k), epsilon)


def rr_two_block_config(k: int, s1: Iterable[int], epsilon: float) -> PartitionConfig:
    """Any S1/S2 split with identity blocks and l = 0 (beta = gamma)."""
    return PartitionConfig.make(k, s1, epsilon, l=0)


def rrwithprior_config(prior: PriorDistribution, epsilon: float) -> PartitionConfig:
    """S1 = top-k labels, output restricted to them, Delta = all outputs."""
    sel = choose_topk(prior, epsilon)
    return PartitionConfig.make(prior.k, sel.y_k, epsilon, l=len(sel.y_k), s_tilde=sel.y_k)


def bin_labels(k: int, bin_count: int) -> np.ndarray:
    """Bin index of each label when ``k`` grid labels are cut into equal bins."""
    if bin_count < 1 or k % bin_count:
        raise ConfigError("EMPTY_BINS", f"bin_count={bin_count} must divide k={k}")
    return np.arange(k) // (k // bin_count)


def rronbins_regression_config(k: int, bin_count: int, epsilon: float) -> RegressionMechanismConfig:
    """Regression config whose equal-width bins match :func:`bin_labels` for values 0..k-1."""
    return RegressionMechanismConfig(-0.5, k - 0.5, 1.0, epsilon, bin_count=bin_count)


def rronbins_config(k: int, bin_count: int, epsilon: float, s1_bins: Optional[Iterable[int]] = None) -> PartitionConfig:
    """B(y) = every label in y's bin.

    With ``s1_bins=None`` this is the one-block row (S1 = S); otherwise S1 is
    the union of the listed bins and l = 0.
    """
    bins = bin_labels(k, bin_count)
    mapping = BlockMapping.from_bins(bins)
    s1 = range(k) if s1_bins is None else [y for y in range(k) if bins[y] in set(s1_bins)]
    return PartitionConfig.make(k, s1, epsilon, l=0, mapping=mapping)


def aggregate_columns(matrix: MechanismMatrix, groups: Sequence[int]) -> MechanismMatrix:
    """Sum output columns by group id (``groups[j]`` for ``output_labels[j]``)."""
    groups = np.asarray(groups)
    ids = np.unique(groups)
    p = np.stack([matrix.p[:, groups == g].sum(axis=1) for g in ids], axis=1)
    return MechanismMatrix(matrix.input_labels, tuple(int(g) for g in ids), p)


@dataclass(frozen=True)
class RPWithPriorGrid:
    """Discretization of the regression mechanism on a uniform grid.

    Grid point ``i`` has value ``values[i]``; labels inside the interval form
    S1 and the output space is every grid point of the support.
    """

    config: PartitionConfig
    values: np.ndarray
    step: float
    half_width: int


def rpwithprior_grid(reg: RegressionMechanismConfig, step: float) -> RPWithPriorGrid:
    m = reg.delta_width / step
    span = (reg.interval_hi - reg.interval_lo) / step
    if abs(m - round(m)) > 1e-9 or abs(span - round(span)) > 1e-9 or round(m) < 1:
        raise ConfigError("INVALID_GRID", "step must divide both delta_width and the interval length")
    m, span = int(round(m)), int(round(span))
    size = span + 2 * m + 1
    values = reg.interval_lo + step * (np.arange(size) - m)
    values[m + span] = reg.interval_hi
    s1 = range(m, m + span + 1)
    window = 2 * m + 1
    image = {}
    for i in range(size):
        start = min(max(i - m, 0), size - window)
        image[i] = frozenset(range(start, start + window))
    cfg = PartitionConfig.make(size, s1, reg.epsilon, l=size, mapping=BlockMapping(image))
    return RPWithPriorGrid(cfg, values, step, m)


def rpwithprior_grid_matrix(reg: RegressionMechanismConfig, grid: RPWithPriorGrid) -> MechanismMatrix:
    """Density evaluated at grid points and renormalized per row."""
    rows = []
    size = grid.values.size
    idx = np.arange(size)
    for i in range(size):
        # pull each grid point a hair towards y so closed-boundary points stay
        # on the right side of y +- delta despite float rounding of the grid
        probe = grid.values - np.sign(idx - i) * grid.step * 1e-6
        f = rpwithprior_density(float(grid.values[i]), probe, reg)
        rows.append(f / f.sum())
    labels = tuple(range(size))
    return MechanismMatrix(labels, labels, np.array(rows))
