"""Synthetic class-imbalanced datasets and label-retention utility.

Label retention (probability that the privatized label lands in ``B(y)``)
stands in for the per-class accuracy of a trained classifier.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BlockMapping, MechanismMatrix
from .errors import DataError
from .partition import LabelDataset, RandomizedDataset
from .rng import RandomStream

# per-class training counts of the two imbalanced CIFAR-10 variants
CIFAR10_1 = (5000, 4900, 4700, 4600, 4500, 4800, 1000, 1500, 1000, 1500)
CIFAR10_2 = (5000, 4900, 4700, 4600, 4500, 4800, 600, 500, 700, 400)
PROFILES = {"cifar10-1": CIFAR10_1, "cifar10-2": CIFAR10_2}


@dataclass(frozen=True)
class ClassCountProfile:
    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if not counts or any(c < 0 for c in counts) or sum(counts) == 0:
            raise DataError("EMPTY_PROFILE", "need nonnegative counts with at least one positive")
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)


def generate_synthetic(profile: ClassCountProfile, stream: RandomStream) -> LabelDataset:
    """Exactly ``profile.counts[y]`` records of class y, shuffled; ids 0..n-1."""
    labels = np.repeat(np.arange(profile.k), profile.counts)
    labels = labels[stream.permutation(labels.size)]
    return LabelDataset(np.arange(labels.size, dtype=np.int64), labels)


@dataclass(frozen=True)
class RetentionReport:
    overall_retention: float
    per_class_retention: np.ndarray
    analytic_retention: np.ndarray
    class_counts: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.per_class_retention - self.analytic_retention)

    def to_dict(self) -> dict:
        return {
            "overall_retention": self.overall_retention,
            "per_class_retention": self.per_class_retention.tolist(),
            "analytic_retention": self.analytic_retention.tolist(),
            "abs_gap": self.gaps.tolist(),
            "class_counts": self.class_counts.tolist(),
        }


def analytic_retention(matrix: MechanismMatrix, mapping: Optional[BlockMapping] = None) -> np.ndarray:
    """``sum over y~ in B(y) of p[y, y~]`` for every input label."""
    out = np.empty(len(matrix.input_labels))
    col = {yt: j for j, yt in enumerate(matrix.output_labels)}
    for i, y in enumerate(matrix.input_labels):
        block = {y} if mapping is None else mapping(y)
        out[i] = sum(matrix.p[i, col[b]] for b in block if b in col)
    return out


def measure_retention(
    dataset: LabelDataset,
    randomized: RandomizedDataset,
    matrix: MechanismMatrix,
    mapping: Optional[BlockMapping] = None,
) -> RetentionReport:
    order_src = np.argsort(dataset.ids, kind="stable")
    order_rnd = np.argsort(randomized.ids, kind="stable")
    src_ids = dataset.ids[order_src]
    if len(randomized) > len(dataset):
        raise DataError("ID_MISMATCH", "randomized dataset has more records than the source")
    # randomized may cover a subset (D2) of the source
    pos = np.searchsorted(src_ids, randomized.ids[order_rnd])
    pos = np.minimum(pos, src_ids.size - 1)
    if not np.array_equal(src_ids[pos], randomized.ids[order_rnd]):
        raise DataError("ID_MISMATCH", "randomized ids not found in the source dataset")
    true = dataset.labels[order_src][pos]
    noisy = randomized.labels[order_rnd]
    k = len(matrix.input_labels)
    if mapping is None:
        hit = true == noisy
    else:
        hit = np.array([b in mapping(a) for a, b in zip(true.tolist(), noisy.tolist())], dtype=bool)
    counts = np.bincount(true, minlength=k)
    kept = np.bincount(true, weights=hit.astype(float), minlength=k)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_class = np.where(counts > 0, kept / np.maximum(counts, 1), np.nan)
    overall = float(hit.mean()) if hit.size else float("nan")
    return RetentionReport(overall, per_class, analytic_retention(matrix, mapping), counts)


def parse_profile(name: str) -> ClassCountProfile:
    """``cifar10-1``, ``cifar10-2`` or a comma-separated count list."""
    if name in PROFILES:
        return ClassCountProfile(PROFILES[name])
    try:
        return ClassCountProfile(tuple(int(c) for c in name.split(",")))
    except ValueError:
        raise DataError("EMPTY_PROFILE", f"unknown profile {name!r}") from None
