"""Machine checks for the privacy and algebraic claims about BlockRR."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .core import BlockMapping, MechanismMatrix, PartitionConfig, PriorDistribution, RegressionMechanismConfig, validate_config
from .errors import ConfigError, MalformedMatrixError
from .mechanisms import (
    build_blockrr_matrix,
    build_rr_matrix,
    build_rronbins_matrix,
    build_rrwithprior_matrix,
    closed_form_beta_gamma,
    rpwithprior_density,
)
from .rng import RandomStream
from . import unify

DP_REL_TOL = 1e-9
EXACT_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    max_ratio: float
    epsilon_bound: float
    dp_pass: bool
    row_residuals: np.ndarray
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio if math.isfinite(self.max_ratio) else "inf",
            "epsilon_bound": self.epsilon_bound,
            "dp_pass": self.dp_pass,
            "row_residuals": [float(r) for r in self.row_residuals],
            "checks": [asdict(c) for c in self.notes],
        }


def column_ratios(matrix: MechanismMatrix) -> np.ndarray:
    """Per output column, max/min over positive entries; inf for mixed zero/positive, nan for all-zero."""
    p = matrix.p
    pos = p > 0
    out = np.full(p.shape[1], np.nan)
    for j in range(p.shape[1]):
        col = p[pos[:, j], j]
        if col.size == 0:
            continue
        out[j] = np.inf if col.size < p.shape[0] else col.max() / col.min()
    return out


def check_label_dp(matrix: MechanismMatrix, epsilon: float) -> VerificationReport:
    if not isinstance(matrix, MechanismMatrix):
        raise MalformedMatrixError("expected a MechanismMatrix")
    if not epsilon >= 0:
        raise ConfigError("NONPOSITIVE_EPSILON", f"epsilon={epsilon}")
    ratios = column_ratios(matrix)
    live = ratios[~np.isnan(ratios)]
    max_ratio = float(live.max()) if live.size else 1.0
    bound = math.exp(epsilon)
    mixed = int(np.sum(np.isinf(ratios)))
    ok = math.isfinite(max_ratio) and max_ratio <= bound * (1 + DP_REL_TOL)
    residuals = np.abs(matrix.p.sum(axis=1) - 1.0)
    notes = [
        Check("ratio_bound", ok, f"max ratio {max_ratio:.17g} vs e^eps {bound:.17g}"),
        Check("no_mixed_zero_columns", mixed == 0, f"{mixed} column(s) mix zero and positive entries"),
        Check("normalization", bool(residuals.max() <= EXACT_TOL), f"max |row sum - 1| = {residuals.max():.3g}"),
    ]
    return VerificationReport(max_ratio, bound, bool(ok and mixed == 0), residuals, notes)


@dataclass
class MonotonicityReport:
    ls: list
    betas: list
    gammas: list
    beta_nondecreasing: bool
    gamma_nonincreasing: bool
    equal_at_zero: bool
    max_gamma_equals_min_beta: bool

    @property
    def passed(self) -> bool:
        return self.beta_nondecreasing and self.gamma_nonincreasing and self.equal_at_zero and self.max_gamma_equals_min_beta


def check_monotonicity(config: PartitionConfig, epsilon: Optional[float] = None) -> MonotonicityReport:
    """Sweep l over 0..|S~1| with the partitions and blocks of ``config`` held fixed."""
    eps = config.epsilon if epsilon is None else epsilon
    n1, n2, b = len(config.s_tilde1), len(config.s_tilde2), config.mapping.block_size
    ls = list(range(n1 + 1))
    sols = [closed_form_beta_gamma(eps, b, n1, n2, l) for l in ls]
    betas = [s.beta for s in sols]
    gammas = [s.gamma for s in sols]
    tol = EXACT_TOL
    return MonotonicityReport(
        ls,
        betas,
        gammas,
        all(x1 >= x0 - tol * abs(x0) for x0, x1 in zip(betas, betas[1:])),
        all(x1 <= x0 + tol * abs(x0) for x0, x1 in zip(gammas, gammas[1:])),
        abs(betas[0] - gammas[0]) <= tol * abs(betas[0]),
        abs(max(gammas) - min(betas)) <= tol * abs(min(betas)),
    )


@dataclass
class MatrixDiff:
    name: str
    blocks: int
    max_abs_diff: float
    passed: bool
    details: dict = field(default_factory=dict)


def _diff(a: MechanismMatrix, b: MechanismMatrix) -> float:
    if a.shape != b.shape or a.output_labels != b.output_labels:
        return math.inf
    return float(np.max(np.abs(a.p - b.p)))


UNIFIED_MECHANISMS = ("RR", "RRWithPrior", "RRonBins", "RPWithPrior-discretized")


def check_unification(name: str, **params) -> MatrixDiff:
    """Compare BlockRR under a unifying configuration with the baseline built directly.

    ``blocks=1`` puts every input in S1 (one output block); ``blocks=2`` splits
    the inputs into S1/S2 with l = 0.  Parameters by mechanism:

    * ``RR``: ``k``, ``epsilon``, ``blocks``, ``s1`` when ``blocks=2``.
    * ``RRWithPrior``: ``prior``, ``epsilon``.
    * ``RRonBins``: ``k``, ``bin_count``, ``epsilon``, ``blocks``, ``s1_bins`` when ``blocks=2``.
    * ``RPWithPrior-discretized``: ``interval``, ``delta_width``, ``epsilon``, ``step``.
    """
    blocks = int(params.get("blocks", 1))
    eps = float(params["epsilon"])
    if name == "RR":
        k = int(params["k"])
        if blocks == 1:
            cfg = unify.rr_config(k, eps)
        else:
            cfg = unify.rr_two_block_config(k, params.get("s1", range(max(1, k // 2))), eps)
        d = _diff(build_blockrr_matrix(cfg), build_rr_matrix(k, eps))
        return MatrixDiff(name, blocks, d, d <= EXACT_TOL)
    if name == "RRWithPrior":
        prior = params["prior"]
        if not isinstance(prior, PriorDistribution):
            prior = PriorDistribution(np.asarray(prior, dtype=float))
        cfg = unify.rrwithprior_config(prior, eps)
        d = _diff(build_blockrr_matrix(cfg), build_rrwithprior_matrix(prior, eps))
        return MatrixDiff(name, 1, d, d <= EXACT_TOL, {"k": len(cfg.s_tilde)})
    if name == "RRonBins":
        k, m = int(params["k"]), int(params["bin_count"])
        s1_bins = None if blocks == 1 else params.get("s1_bins", range(max(1, m // 2)))
        cfg = unify.rronbins_config(k, m, eps, s1_bins)
        bins = unify.bin_labels(k, m)
        block = unify.aggregate_columns(build_blockrr_matrix(cfg), bins[list(cfg.output_labels)])
        reg = unify.rronbins_regression_config(k, m, eps)
        direct = build_rronbins_matrix(reg, values=np.arange(k, dtype=float))
        d = _diff(block, direct)
        return MatrixDiff(name, blocks, d, d <= EXACT_TOL)
    if name == "RPWithPrior-discretized":
        lo, hi = params.get("interval", (0.0, 1.0))
        reg = RegressionMechanismConfig(lo, hi, float(params.get("delta_width", 0.1)), eps)
        step = float(params.get("step", 1e-3))
        grid = unify.rpwithprior_grid(reg, step)
        block = build_blockrr_matrix(grid.config)
        d = _diff(block, unify.rpwithprior_grid_matrix(reg, grid))
        # mass on N_y for an interior y: discrete vs continuous, off by < step / gamma_rp
        mid = int(np.argmin(np.abs(grid.values - 0.5 * (lo + hi))))
        window = np.abs(np.arange(grid.values.size) - mid) <= grid.half_width
        discrete_mass = float(block.p[mid, window].sum())
        continuous_mass = 2 * reg.delta_width / reg.gamma_rp
        gap = abs(discrete_mass - continuous_mass)
        details = {"near_mass_gap": gap, "gap_bound": step / reg.gamma_rp}
        return MatrixDiff(name, 1, d, d <= EXACT_TOL and gap <= step / reg.gamma_rp, details)
    raise ConfigError("UNKNOWN_MECHANISM", f"{name!r} is not one of {UNIFIED_MECHANISMS}")


@dataclass
class DensityReport:
    normalization_error: float
    ratio: float
    expected_ratio: float
    passed: bool


def check_rpwithprior_density(config: RegressionMechanismConfig, y: float) -> DensityReport:
    """Quadrature normalization and the inside/outside density ratio for one input."""
    lo, hi = config.support
    a, b = max(y - config.delta_width, lo), min(y + config.delta_width, hi)
    f = lambda t: rpwithprior_density(y, t, config)
    pts = [p for p in (a, b) if lo < p < hi]
    total, _ = integrate.quad(f, lo, hi, points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)
    err = abs(total - 1.0)
    expected = math.exp(config.epsilon)
    if config.interval_lo <= y <= config.interval_hi:
        far = lo + 0.5 * (a - lo) if a > lo else b + 0.5 * (hi - b)
        ratio = f(y) / f(far)
    else:
        ratio, expected = 1.0, 1.0
    return DensityReport(err, ratio, expected, err <= 1e-9 and abs(ratio - expected) <= EXACT_TOL * expected)


@dataclass
class LpReport:
    ratio_feasible: bool
    delta_uniform: bool
    normalized: bool
    nonnegative: bool
    boundary_residual: float
    chain_residual: float
    notes: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.ratio_feasible and self.delta_uniform and self.normalized and self.nonnegative

    @property
    def boundary_tight(self) -> bool:
        return self.boundary_residual <= EXACT_TOL and self.chain_residual <= EXACT_TOL

    @property
    def passed(self) -> bool:
        return self.feasible and self.boundary_tight


def check_lp_conditions(matrix: MechanismMatrix, config: PartitionConfig) -> LpReport:
    """Feasibility for the linear program plus equality in both bound chains.

    The chains lower-bound an off-block entry by ``e^-eps`` times the largest
    entry of its column (the binding ratio constraint); tightness means that
    bound is attained for every y in S1 on S~ \\ B(y) and every y in S2 on
    S~ \\ (B(y) ∪ Delta).
    """
    eps = config.epsilon
    e_neg = math.exp(-eps)
    p = matrix.p
    outs = matrix.output_labels
    col = {yt: j for j, yt in enumerate(outs)}
    n = len(outs)
    ratio_ok = check_label_dp(matrix, eps).dp_pass
    delta_ok, worst_delta = True, 0.0
    for y in config.s2:
        for yt in config.delta:
            dev = abs(p[matrix.input_labels.index(y), col[yt]] - 1.0 / n)
            worst_delta = max(worst_delta, dev)
    delta_ok = worst_delta <= EXACT_TOL
    row_res = float(np.max(np.abs(p.sum(axis=1) - 1.0)))
    nonneg = bool(np.all(p >= 0))

    ref = p.max(axis=0)
    boundary, chain = 0.0, 0.0
    for i, y in enumerate(matrix.input_labels):
        block = config.mapping(y) & config.s_tilde
        excluded = block if y in config.s1 else block | config.delta
        named = [col[yt] for yt in outs if yt not in excluded]
        if named:
            boundary = max(boundary, float(np.max(np.abs(p[i, named] - e_neg * ref[named]))))
        total = p[i, [col[yt] for yt in block]].sum() + e_neg * ref[named].sum()
        if y in config.s2:
            total += len(config.delta) / n
        chain = max(chain, abs(total - 1.0))
    notes = [
        Check("ratio_constraints", ratio_ok),
        Check("delta_uniform", delta_ok, f"max deviation {worst_delta:.3g}"),
        Check("normalization", row_res <= EXACT_TOL, f"max residual {row_res:.3g}"),
        Check("nonnegativity", nonneg),
        Check("boundary_equality", boundary <= EXACT_TOL, f"max residual {boundary:.3g}"),
        Check("chain_equality", chain <= EXACT_TOL, f"max residual {chain:.3g}"),
    ]
    return LpReport(ratio_ok, delta_ok, row_res <= EXACT_TOL, nonneg, boundary, chain, notes)


@dataclass
class EmpiricalReport:
    n: int
    empirical: np.ndarray
    tv: np.ndarray

    @property
    def max_tv(self) -> float:
        return float(self.tv.max())


def empirical_transition(matrix: MechanismMatrix, n: int, stream: RandomStream) -> EmpiricalReport:
    """Draw ``n`` samples from every row and compare frequencies with the row."""
    if n < 1:
        raise ConfigError("NONPOSITIVE_N", f"n={n}")
    emp = np.empty_like(matrix.p)
    for i in range(matrix.p.shape[0]):
        cdf = np.cumsum(matrix.p[i])
        idx = np.minimum(np.searchsorted(cdf, stream.uniforms(n), side="right"), cdf.size - 1)
        emp[i] = np.bincount(idx, minlength=cdf.size) / n
    tv = 0.5 * np.abs(emp - matrix.p).sum(axis=1)
    return EmpiricalReport(n, emp, tv)


def random_valid_config(rng: np.random.Generator, max_k: int = 12, eps_range: Sequence[float] = (0.1, 8.0)) -> PartitionConfig:
    """Draw a random valid PartitionConfig.

    Mixes four shapes: identity blocks with a random S1/S2 split and random
    l; equal-size label blocks with S1 a union of blocks; a restricted output
    space equal to S1 with Delta = S~1; and S1 = S.
    """
    eps = float(rng.uniform(*eps_range))
    k = int(rng.integers(2, max_k + 1))
    shape = rng.choice(["identity", "blocks", "restricted", "full"], p=[0.5, 0.25, 0.15, 0.1])
    if shape == "full":
        cfg = PartitionConfig.make(k, range(k), eps)
    elif shape == "restricted":
        s1 = rng.choice(k, size=int(rng.integers(1, k + 1)), replace=False)
        cfg = PartitionConfig.make(k, s1, eps, l=len(s1), s_tilde=s1)
    else:
        if shape == "blocks":
            sizes = [d for d in range(1, k + 1) if k % d == 0]
            size = int(rng.choice(sizes))
            mapping = BlockMapping.contiguous_blocks(k, size)
            nblocks = k // size
            chosen = rng.random(nblocks) < 0.5
            s1 = [y for y in range(k) if chosen[y // size]]
        else:
            mapping = BlockMapping.identity(k)
            s1 = [y for y in range(k) if rng.random() < 0.5]
        st1_size = len(mapping.union(s1))
        l = int(rng.integers(0, st1_size + 1)) if s1 and len(s1) < k else 0
        cfg = PartitionConfig.make(k, s1, eps, l=l, mapping=mapping)
        if l:
            delta = rng.choice(sorted(cfg.s_tilde1), size=l, replace=False)
            cfg = PartitionConfig.make(k, s1, eps, l=l, mapping=mapping, delta=delta)
    validate_config(cfg).raise_for_error()
    return cfg
