"""Domain types shared by every module, and configuration validation.

Labels are always the contiguous integers ``0..k-1``.  External label names
are kept in :class:`LabelSpace` and mapped at ingestion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, MalformedMatrixError

ROW_SUM_TOL = 1e-12


def _labels(values: Iterable[int]) -> frozenset:
    return frozenset(int(v) for v in values)


def top_labels(weights: Sequence[float], candidates: Iterable[int], count: int) -> frozenset:
    """The ``count`` candidates with the largest weight, ties by ascending label."""
    ordered = sorted(candidates, key=lambda j: (-float(weights[j]), j))
    return frozenset(ordered[:count])


@dataclass(frozen=True)
class LabelSpace:
    k: int
    names: Optional[tuple] = None

    def __post_init__(self):
        if int(self.k) < 1:
            raise ConfigError("INVALID_LABEL_SET", "k must be a positive integer")
        if self.names is not None:
            if len(self.names) != self.k or len(set(self.names)) != self.k:
                raise ConfigError("INVALID_LABEL_SET", "label names must be k distinct values")

    @classmethod
    def from_names(cls, names: Iterable) -> "LabelSpace":
        names = tuple(names)
        return cls(len(names), names)

    @property
    def labels(self) -> tuple:
        return tuple(range(self.k))

    def encode(self, name) -> int:
        if self.names is None:
            label = int(name)
            if not 0 <= label < self.k:
                raise ConfigError("LABEL_OUT_OF_RANGE", f"label {name!r} not in [0, {self.k})")
            return label
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigError("LABEL_OUT_OF_RANGE", f"unknown label name {name!r}") from None

    def decode(self, label: int):
        return label if self.names is None else self.names[label]


@dataclass(frozen=True)
class BlockMapping:
    """Explicit per-label block map ``y -> B(y)`` with ``y in B(y)``."""

    image: Mapping[int, frozenset]

    def __post_init__(self):
        image = {int(y): _labels(b) for y, b in self.image.items()}
        if not image:
            raise ConfigError("INVALID_MAPPING", "mapping is empty")
        sizes = {len(b) for b in image.values()}
        for y, b in image.items():
            if y not in b:
                raise ConfigError("INVALID_MAPPING", f"label {y} is not in its own block")
        if len(sizes) != 1:
            raise ConfigError("INVALID_MAPPING", f"block sizes differ: {sorted(sizes)}")
        object.__setattr__(self, "image", image)

    @property
    def block_size(self) -> int:
        return len(next(iter(self.image.values())))

    def __call__(self, y: int) -> frozenset:
        return self.image[int(y)]

    def union(self, labels: Iterable[int]) -> frozenset:
        out: set = set()
        for y in labels:
            out |= self.image[int(y)]
        return frozenset(out)

    @classmethod
    def identity(cls, k: int) -> "BlockMapping":
        return cls({y: frozenset([y]) for y in range(k)})

    @classmethod
    def from_bins(cls, bin_of: Sequence[int]) -> "BlockMapping":
        """Block of ``y`` is every label sharing its bin index."""
        groups: dict = {}
        for y, b in enumerate(bin_of):
            groups.setdefault(int(b), set()).add(y)
        return cls({y: frozenset(groups[int(b)]) for y, b in enumerate(bin_of)})

    @classmethod
    def contiguous_blocks(cls, k: int, size: int) -> "BlockMapping":
        if size < 1 or k % size:
            raise ConfigError("INVALID_MAPPING", f"block size {size} does not divide k={k}")
        return cls.from_bins([y // size for y in range(k)])


@dataclass(frozen=True)
class PartitionConfig:
    space: LabelSpace
    s1: frozenset
    s2: frozenset
    s_tilde: frozenset
    s_tilde1: frozenset
    s_tilde2: frozenset
    delta: frozenset
    l: int
    epsilon: float
    mapping: BlockMapping

    @property
    def k(self) -> int:
        return self.space.k

    @property
    def output_labels(self) -> tuple:
        return tuple(sorted(self.s_tilde))

    @classmethod
    def make(
        cls,
        k: int,
        s1: Iterable[int],
        epsilon: float,
        *,
        l: int = 0,
        s_tilde: Optional[Iterable[int]] = None,
        mapping: Optional[BlockMapping] = None,
        delta: Optional[Iterable[int]] = None,
        prior: Optional[Sequence[float]] = None,
    ) -> "PartitionConfig":
        """Assemble a config, deriving S2, the output split and (if absent) Delta.

        Delta defaults to the ``l`` labels of S~1 with the largest prior mass,
        or the ``l`` smallest labels of S~1 when no prior is given.  Nothing is
        validated here; call :func:`validate_config`.
        """
        space = LabelSpace(k)
        s1 = _labels(s1)
        s2 = frozenset(space.labels) - s1
        s_tilde = frozenset(space.labels) if s_tilde is None else _labels(s_tilde)
        mapping = BlockMapping.identity(k) if mapping is None else mapping
        st1, st2 = derive_output_partition(s1, s2, s_tilde, mapping)
        if delta is None:
            weights = prior if prior is not None else [1.0] * k
            delta = top_labels(weights, st1, l)
        return cls(space, s1, s2, s_tilde, st1, st2, _labels(delta), int(l), float(epsilon), mapping)

    def with_l(self, l: int, prior: Optional[Sequence[float]] = None) -> "PartitionConfig":
        weights = prior if prior is not None else [1.0] * self.k
        return PartitionConfig(
            self.space, self.s1, self.s2, self.s_tilde, self.s_tilde1, self.s_tilde2,
            top_labels(weights, self.s_tilde1, l), int(l), self.epsilon, self.mapping,
        )

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "k": self.k,
            "s1": sorted(self.s1),
            "s2": sorted(self.s2),
            "s_tilde": sorted(self.s_tilde),
            "delta": sorted(self.delta),
            "l": self.l,
            "mapping": {str(y): sorted(b) for y, b in sorted(self.mapping.image.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PartitionConfig":
        try:
            k = int(d["k"])
            mapping = d.get("mapping")
            mapping = (
                BlockMapping.identity(k)
                if mapping is None
                else BlockMapping({int(y): b for y, b in mapping.items()})
            )
            cfg = cls.make(
                k, d["s1"], float(d["epsilon"]), l=int(d.get("l", len(d.get("delta", [])))),
                s_tilde=d.get("s_tilde"), mapping=mapping, delta=d.get("delta"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("MALFORMED_CONFIG", str(exc)) from exc
        if "s2" in d and _labels(d["s2"]) != cfg.s2:
            raise ConfigError("OVERLAPPING_PARTITION", "s2 is not the complement of s1")
        return cfg


def derive_output_partition(s1, s2, s_tilde, mapping: BlockMapping) -> tuple:
    """``S~1 = S~ ∩ B(S1)`` and ``S~2 = S~ \\ S~1``."""
    s_tilde = _labels(s_tilde)
    st1 = s_tilde & mapping.union(s1)
    return frozenset(st1), frozenset(s_tilde - st1)


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    error: Optional[str] = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def raise_for_error(self) -> None:
        if not self.ok:
            raise ConfigError(self.error, self.message)


def validate_config(config: PartitionConfig) -> ValidationResult:
    """Check every PartitionConfig invariant; report the first failure by name."""

    def fail(code, msg):
        return ValidationResult(False, code, msg)

    if not (config.epsilon > 0 and math.isfinite(config.epsilon)):
        return fail("NONPOSITIVE_EPSILON", f"epsilon={config.epsilon}")
    universe = frozenset(config.space.labels)
    for name in ("s1", "s2", "s_tilde", "delta"):
        if not getattr(config, name) <= universe:
            return fail("INVALID_LABEL_SET", f"{name} has labels outside [0, {config.k})")
    if not config.s_tilde:
        return fail("INVALID_LABEL_SET", "s_tilde is empty")
    if config.s1 & config.s2 or (config.s1 | config.s2) != universe:
        return fail("OVERLAPPING_PARTITION", "s1 and s2 must partition S")
    if set(config.mapping.image) != set(universe) or not all(
        b <= universe for b in config.mapping.image.values()
    ):
        return fail("INVALID_MAPPING", "mapping must send every label of S to a subset of S")

    st1, st2 = derive_output_partition(config.s1, config.s2, config.s_tilde, config.mapping)
    if (st1, st2) != (config.s_tilde1, config.s_tilde2):
        return fail("INCONSISTENT_OUTPUT_PARTITION", "s_tilde1/s_tilde2 disagree with S~ ∩ B(S1)")
    for y in config.s1:
        if not config.mapping(y) <= config.s_tilde:
            return fail("INCONSISTENT_OUTPUT_PARTITION", f"B({y}) is not inside S~ for y in S1")
    if st2:
        for y in config.s2:
            if not config.mapping(y) <= st2:
                return fail("INCONSISTENT_OUTPUT_PARTITION", f"B({y}) is not inside S~2 for y in S2")

    if not config.delta <= st1 or len(config.delta) != config.l or not 0 <= config.l <= len(st1):
        return fail("DELTA_OUT_OF_RANGE", f"need delta ⊆ S~1 with |delta| = l = {config.l} <= {len(st1)}")
    if config.s2 and not st2 and config.l != len(st1):
        return fail(
            "EMPTY_OUTPUT_WITH_NONEMPTY_SOURCE",
            "S2 nonempty with S~2 empty needs l = |S~1| (otherwise the two row equations conflict)",
        )
    return ValidationResult(True)


@dataclass(frozen=True)
class MechanismMatrix:
    """Row-stochastic ``p[y, y~]`` over ``input_labels x output_labels``."""

    input_labels: tuple
    output_labels: tuple
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        ins = tuple(int(v) for v in self.input_labels)
        outs = tuple(int(v) for v in self.output_labels)
        if p.ndim != 2 or p.shape != (len(ins), len(outs)) or p.size == 0:
            raise MalformedMatrixError(f"shape {p.shape} does not match labels ({len(ins)}, {len(outs)})")
        if len(set(ins)) != len(ins) or len(set(outs)) != len(outs):
            raise MalformedMatrixError("duplicate labels")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise MalformedMatrixError("entries must be finite and nonnegative")
        worst = float(np.max(np.abs(p.sum(axis=1) - 1.0)))
        if worst > ROW_SUM_TOL:
            raise MalformedMatrixError(f"row sums deviate from 1 by {worst:.3g}")
        p.setflags(write=False)
        object.__setattr__(self, "input_labels", ins)
        object.__setattr__(self, "output_labels", outs)
        object.__setattr__(self, "p", p)

    @property
    def shape(self) -> tuple:
        return self.p.shape

    def row(self, y: int) -> np.ndarray:
        try:
            return self.p[self.input_labels.index(int(y))]
        except ValueError:
            raise ConfigError("LABEL_OUT_OF_RANGE", f"label {y} is not an input label") from None

    def entry(self, y: int, y_tilde: int) -> float:
        return float(self.row(y)[self.output_labels.index(int(y_tilde))])

    def to_dict(self) -> dict:
        return {
            "input_labels": list(self.input_labels),
            "output_labels": list(self.output_labels),
            "p": self.p.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MechanismMatrix":
        try:
            return cls(tuple(d["input_labels"]), tuple(d["output_labels"]), np.asarray(d["p"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedMatrixError):
                raise
            raise MalformedMatrixError(str(exc)) from exc


@dataclass(frozen=True)
class PriorDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64).ravel()
        if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ConfigError("INVALID_PRIOR", "prior entries must be finite and nonnegative")
        if abs(p.sum() - 1.0) > ROW_SUM_TOL:
            raise ConfigError("INVALID_PRIOR", f"prior sums to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def k(self) -> int:
        return self.probs.size

    def __getitem__(self, j):
        return self.probs[j]

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def from_counts(cls, counts: Sequence[float]) -> "PriorDistribution":
        c = np.asarray(counts, dtype=np.float64)
        return cls(c / c.sum())

    @classmethod
    def uniform(cls, k: int) -> "PriorDistribution":
        return cls(np.full(k, 1.0 / k))

    def to_dict(self) -> dict:
        return {"k": self.k, "p": self.probs.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "PriorDistribution":
        prior = cls(np.asarray(d["p"], dtype=float))
        if "k" in d and int(d["k"]) != prior.k:
            raise ConfigError("INVALID_PRIOR", f"k={d['k']} but {prior.k} probabilities")
        return prior


@dataclass(frozen=True)
class BetaGamma:
    beta: float
    gamma: float
    beta1: float
    gamma1: float
    kappa: float


@dataclass(frozen=True)
class RegressionMechanismConfig:
    """Parameters shared by the two regression mechanisms.

    ``bin_map`` takes an array of values and returns bin indices in
    ``[0, bin_count)``; by default it is equal-width binning over
    ``[interval_lo, interval_hi]`` with the bin midpoints as representatives.
    """

    interval_lo: float
    interval_hi: float
    delta_width: float
    epsilon: float
    bin_count: Optional[int] = None
    bin_map: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.interval_lo < self.interval_hi:
            raise ConfigError("INVALID_INTERVAL", "need interval_lo < interval_hi")
        if not self.delta_width > 0:
            raise ConfigError("NONPOSITIVE_DELTA", "delta_width must be positive")
        if not self.epsilon > 0:
            raise ConfigError("NONPOSITIVE_EPSILON", f"epsilon={self.epsilon}")

    @property
    def gamma_rp(self) -> float:
        return 2.0 * self.delta_width + math.exp(-self.epsilon) * (self.interval_hi - self.interval_lo)

    @property
    def support(self) -> tuple:
        return (self.interval_lo - self.delta_width, self.interval_hi + self.delta_width)

    @property
    def bin_representatives(self) -> np.ndarray:
        if not self.bin_count or self.bin_count < 1:
            raise ConfigError("EMPTY_BINS", "bin_count must be at least 1")
        width = (self.interval_hi - self.interval_lo) / self.bin_count
        return self.interval_lo + width * (np.arange(self.bin_count) + 0.5)

    def bin_index(self, values) -> np.ndarray:
        if not self.bin_count or self.bin_count < 1:
            raise ConfigError("EMPTY_BINS", "bin_count must be at least 1")
        v = np.asarray(values, dtype=np.float64)
        if self.bin_map is not None:
            idx = np.asarray(self.bin_map(v), dtype=np.int64)
            if np.any((idx < 0) | (idx >= self.bin_count)):
                raise ConfigError("EMPTY_BINS", "bin_map returned an index outside [0, bin_count)")
            return idx
        frac = (v - self.interval_lo) / (self.interval_hi - self.interval_lo)
        return np.clip(np.floor(frac * self.bin_count).astype(np.int64), 0, self.bin_count - 1)
