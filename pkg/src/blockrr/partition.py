"""Prior-driven S1/S2 partitioning and the two-stage randomization pipeline.

The dataset is split once into D1 and D2.  The Laplace prior estimator sees
only D1, BlockRR sees only D2, and both spend the full budget epsilon
(parallel composition over disjoint data).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import BlockMapping, MechanismMatrix, PartitionConfig, PriorDistribution, derive_output_partition, top_labels, validate_config
from .errors import ConfigError, DataError
from .mechanisms import build_blockrr_matrix, sample_labels
from .prior import HistogramEstimate, noisy_histogram, prior_from_histogram
from .rng import RandomStream

logger = logging.getLogger(__name__)

DEFAULT_SPLIT_FRACTION = 0.01


@dataclass(frozen=True)
class LabelDataset:
    """Records ``(id, label)``; ``index`` is each record's row in the source data."""

    ids: np.ndarray
    labels: np.ndarray
    index: Optional[np.ndarray] = None

    def __post_init__(self):
        ids = np.asarray(self.ids)
        labels = np.asarray(self.labels, dtype=np.int64)
        index = np.arange(labels.size, dtype=np.int64) if self.index is None else np.asarray(self.index, dtype=np.int64)
        if not (ids.shape == labels.shape == index.shape) or labels.ndim != 1:
            raise DataError("MALFORMED_DATASET", "ids, labels and index must be 1-d and equally long")
        if np.unique(ids).size != ids.size:
            raise DataError("DUPLICATE_ID", "record ids must be unique")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return int(self.labels.size)

    def take(self, positions) -> "LabelDataset":
        positions = np.asarray(positions, dtype=np.int64)
        return LabelDataset(self.ids[positions], self.labels[positions], self.index[positions])


@dataclass(frozen=True)
class RandomizedDataset:
    ids: np.ndarray
    labels: np.ndarray
    original_index: np.ndarray

    def __len__(self) -> int:
        return int(self.labels.size)


@dataclass(frozen=True)
class WeightMatrix:
    """``w[i, j] = p_j * exp(-[i != j] / sigma)`` for i in S, j in ``columns``."""

    w: np.ndarray
    sigma: float
    columns: tuple
    diagonal: np.ndarray  # w_ii = p_i, defined even when i is not an output column


def build_weight_matrix(prior: PriorDistribution, sigma: float, s_tilde: Optional[Iterable[int]] = None) -> WeightMatrix:
    if not sigma > 0:
        raise ConfigError("NONPOSITIVE_SIGMA", f"sigma={sigma}")
    cols = tuple(range(prior.k)) if s_tilde is None else tuple(sorted(int(j) for j in s_tilde))
    p = prior.probs
    rows = np.arange(prior.k)[:, None]
    off = rows != np.asarray(cols)[None, :]
    w = p[list(cols)][None, :] * np.where(off, math.exp(-1.0 / sigma), 1.0)
    return WeightMatrix(w, float(sigma), cols, p.copy())


def split_by_weights(w: WeightMatrix) -> tuple:
    """``S1 = {i : w_ii >= w_ij for all j in S~}``; S2 is the rest."""
    s1 = frozenset(i for i in range(w.w.shape[0]) if np.all(w.diagonal[i] >= w.w[i]))
    return s1, frozenset(range(w.w.shape[0])) - s1


def select_delta(prior: PriorDistribution, s_tilde1: Iterable[int], l: int) -> frozenset:
    s_tilde1 = frozenset(s_tilde1)
    if not 0 <= l <= len(s_tilde1):
        raise ConfigError("L_OUT_OF_RANGE", f"l={l} outside [0, {len(s_tilde1)}]")
    return top_labels(prior.probs, s_tilde1, l)


@dataclass(frozen=True)
class PipelineConfig:
    partition: PartitionConfig
    prior: PriorDistribution
    sigma: float
    split_fraction: float
    histogram: Optional[HistogramEstimate] = field(default=None, repr=False)
    requested_l: Optional[int] = None


def split_dataset(dataset: LabelDataset, split_fraction: float, stream: RandomStream) -> tuple:
    """Seeded shuffle then prefix split into (D1, D2)."""
    if not 0.0 < split_fraction < 1.0:
        raise ConfigError("INVALID_SPLIT_FRACTION", f"split_fraction={split_fraction} not in (0, 1)")
    n = len(dataset)
    n1 = int(math.floor(split_fraction * n + 0.5))
    if n1 == 0 or n1 == n:
        raise DataError("EMPTY_SPLIT", f"split of {n} records at {split_fraction} leaves an empty part")
    perm = stream.permutation(n)
    return dataset.take(np.sort(perm[:n1])), dataset.take(np.sort(perm[n1:]))


def partition_from_prior(
    prior: PriorDistribution,
    epsilon: float,
    sigma: float,
    l: int,
    mapping: Optional[BlockMapping] = None,
    s_tilde: Optional[Iterable[int]] = None,
) -> PartitionConfig:
    """Weight matrix, S1/S2 split, output split and Delta from a prior.

    When S2 comes out empty, l and Delta are dropped (the result is plain RR
    for identity blocks).  A requested l larger than |S~1| is clamped.
    """
    k = prior.k
    mapping = BlockMapping.identity(k) if mapping is None else mapping
    s_tilde = frozenset(range(k)) if s_tilde is None else frozenset(s_tilde)
    s1, s2 = split_by_weights(build_weight_matrix(prior, sigma, s_tilde))
    st1, _ = derive_output_partition(s1, s2, s_tilde, mapping)
    if not s2:
        l_eff = 0
    else:
        l_eff = min(int(l), len(st1))
        if l_eff != l:
            logger.warning("l=%d exceeds |S~1|=%d; clamped", l, len(st1))
    delta = select_delta(prior, st1, l_eff)
    cfg = PartitionConfig.make(k, s1, epsilon, l=l_eff, s_tilde=s_tilde, mapping=mapping, delta=delta)
    validate_config(cfg).raise_for_error()
    return cfg


def build_pipeline(
    dataset: LabelDataset,
    epsilon: float,
    sigma: float,
    l: int,
    mapping: Optional[BlockMapping] = None,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
    stream: Optional[RandomStream] = None,
    *,
    k: Optional[int] = None,
    s_tilde: Optional[Iterable[int]] = None,
) -> tuple:
    """Split, estimate the prior on D1, derive the partition; return ``(PipelineConfig, D2)``."""
    if stream is None:
        raise ConfigError("MISSING_SEED", "a RandomStream is required")
    if len(dataset) == 0:
        raise DataError("EMPTY_SPLIT", "dataset is empty")
    k = int(dataset.labels.max()) + 1 if k is None else int(k)
    d1, d2 = split_dataset(dataset, split_fraction, stream.child("split"))
    hist = noisy_histogram(d1.labels, epsilon, k, stream.child("prior"))
    prior = prior_from_histogram(hist)
    cfg = partition_from_prior(prior, epsilon, sigma, l, mapping, s_tilde)
    return PipelineConfig(cfg, prior, float(sigma), float(split_fraction), hist, int(l)), d2


def randomize_dataset(d2: LabelDataset, config: PartitionConfig, stream: RandomStream) -> RandomizedDataset:
    """Replace each label by an independent BlockRR draw keyed on the record id."""
    matrix = build_blockrr_matrix(config)
    if len(d2) and (d2.labels.min() < 0 or d2.labels.max() >= config.k):
        raise DataError("LABEL_OUT_OF_RANGE", f"labels must lie in [0, {config.k})")
    u = stream.uniform_at(d2.ids)
    return RandomizedDataset(d2.ids.copy(), sample_labels(d2.labels, matrix, u), d2.index.copy())


@dataclass(frozen=True)
class PipelineRun:
    pipeline: PipelineConfig
    d1_size: int
    randomized: RandomizedDataset
    matrix: MechanismMatrix
    manifest: dict


def run_pipeline(
    dataset: LabelDataset,
    epsilon: float,
    sigma: float,
    l: int,
    seed: int,
    *,
    mapping: Optional[BlockMapping] = None,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
    k: Optional[int] = None,
) -> PipelineRun:
    """The whole pipeline from one seed."""
    from . import __version__

    root = RandomStream(seed)
    pipe, d2 = build_pipeline(dataset, epsilon, sigma, l, mapping, split_fraction, root, k=k)
    randomized = randomize_dataset(d2, pipe.partition, root.child("randomize"))
    manifest = {
        "version": __version__,
        "seed": int(seed),
        "epsilon": float(epsilon),
        "sigma": float(sigma),
        "l_requested": int(l),
        "l": pipe.partition.l,
        "split_fraction": float(split_fraction),
        "n_records": len(dataset),
        "d1_size": len(dataset) - len(d2),
        "d2_size": len(d2),
        "prior": pipe.prior.to_dict(),
        "partition": pipe.partition.to_dict(),
    }
    return PipelineRun(pipe, len(dataset) - len(d2), randomized, build_blockrr_matrix(pipe.partition), manifest)
