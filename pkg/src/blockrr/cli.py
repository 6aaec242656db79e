"""Command-line driver.

Exit codes: 0 ok, 1 unification mismatch, 2 DP violation, 3 malformed matrix
(``verify``), 64 usage error, 65 data error.  Diagnostics go to stderr;
stdout is used only for ``--output -``.

``simulate`` reports label retention (privatized label inside ``B(y)``) as a
desk-scale stand-in for the per-class accuracy of a trained network.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import io as bio
from .core import PriorDistribution, RegressionMechanismConfig
from .errors import BlockRRError
from .mechanisms import build_blockrr_matrix, build_rr_matrix, build_rronbins_matrix, build_rrwithprior_matrix
from .partition import DEFAULT_SPLIT_FRACTION, partition_from_prior, run_pipeline
from .prior import noisy_histogram, prior_from_histogram
from .rng import RandomStream
from .simulate import generate_synthetic, measure_retention, parse_profile
from .verifier import check_label_dp, check_lp_conditions, check_unification, empirical_transition

EXIT_OK, EXIT_MISMATCH, EXIT_DP, EXIT_MALFORMED, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 3, 64, 65

log = logging.getLogger("blockrr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--split-frac", type=float, default=DEFAULT_SPLIT_FRACTION)
    p.add_argument("--output")
    p.add_argument("--debug", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blockrr", description="BlockRR label-DP toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = [_common()]

    p = sub.add_parser("estimate-prior", parents=common, help="Laplace prior estimate from an id,label CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int)

    p = sub.add_parser("partition", parents=common, help="S1/S2 split and Delta from a prior")
    p.add_argument("--prior", required=True)

    p = sub.add_parser("matrix", parents=common, help="emit a mechanism matrix")
    p.add_argument("--mechanism", required=True, choices=["blockrr", "rr", "rrwithprior", "rronbins"])
    p.add_argument("--config")
    p.add_argument("--prior")
    p.add_argument("--k", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=1.0)

    p = sub.add_parser("randomize", parents=common, help="full two-stage pipeline on an id,label CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--manifest")

    p = sub.add_parser("verify", parents=common, help="label-DP and LP checks on a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--config")

    p = sub.add_parser("simulate", parents=common, help="synthetic profile -> pipeline -> retention report")
    p.add_argument("--profile", default="cifar10-2")
    p.add_argument("--draws", type=int, default=100_000)

    p = sub.add_parser("compare", parents=common, help="BlockRR vs baseline unification diffs")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--prior")
    p.add_argument("--step", type=float, default=1e-2)
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command} requires " + ", ".join("--" + n for n in missing))


def _emit(doc, args) -> None:
    if args.output:
        bio.write_json(doc, args.output)


def cmd_estimate_prior(args) -> int:
    _need(args, "seed", "epsilon", "output")
    data = bio.read_dataset(args.input)
    k = args.k if args.k is not None else int(data.labels.max()) + 1
    hist = noisy_histogram(data.labels, args.epsilon, k, RandomStream(args.seed, "estimate-prior"))
    if args.debug:
        log.info("noisy counts: %s", hist.noisy_counts.tolist())
    bio.write_json(prior_from_histogram(hist).to_dict(), args.output)
    return EXIT_OK


def cmd_partition(args) -> int:
    _need(args, "epsilon", "sigma", "output")
    prior = bio.read_prior(args.prior)
    cfg = partition_from_prior(prior, args.epsilon, args.sigma, args.l)
    bio.write_json(cfg.to_dict(), args.output)
    return EXIT_OK


def cmd_matrix(args) -> int:
    _need(args, "output")
    mech = args.mechanism
    if mech == "blockrr":
        if args.config:
            cfg = bio.read_config(args.config)
        else:
            _need(args, "prior", "epsilon", "sigma")
            cfg = partition_from_prior(bio.read_prior(args.prior), args.epsilon, args.sigma, args.l)
        m = build_blockrr_matrix(cfg)
    elif mech == "rr":
        _need(args, "k", "epsilon")
        m = build_rr_matrix(args.k, args.epsilon)
    elif mech == "rrwithprior":
        _need(args, "prior", "epsilon")
        m = build_rrwithprior_matrix(bio.read_prior(args.prior), args.epsilon)
    else:
        _need(args, "bins", "epsilon")
        m = build_rronbins_matrix(RegressionMechanismConfig(args.lo, args.hi, 1.0, args.epsilon, bin_count=args.bins))
    bio.write_json(m.to_dict(), args.output)
    return EXIT_OK


def _manifest(args, extra: dict) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {"flags": flags, **extra}


def cmd_randomize(args) -> int:
    _need(args, "seed", "epsilon", "sigma")
    if args.output is None:
        args.output = str(Path(args.input).with_suffix(".randomized.csv"))
    data = bio.read_dataset(args.input)
    run = run_pipeline(data, args.epsilon, args.sigma, args.l, args.seed, split_fraction=args.split_frac, k=args.k)
    if args.debug:
        log.info("noisy counts: %s", run.pipeline.histogram.noisy_counts.tolist())
    bio.write_text(bio.randomized_to_csv(run.randomized), args.output)
    manifest_path = args.manifest or (None if args.output == "-" else f"{args.output}.manifest.json")
    if manifest_path:
        bio.write_json(_manifest(args, run.manifest), manifest_path)
    log.info("randomized %d records (D1=%d held out for the prior)", len(run.randomized), run.d1_size)
    return EXIT_OK


def cmd_verify(args) -> int:
    _need(args, "epsilon")
    try:
        matrix = bio.read_matrix(args.matrix)
    except (BlockRRError, KeyError, TypeError) as exc:
        # unreadable or structurally invalid matrix files are "malformed input"
        log.error("%s", exc)
        return EXIT_MALFORMED
    report = check_label_dp(matrix, args.epsilon)
    doc = report.to_dict()
    if args.config:
        lp = check_lp_conditions(matrix, bio.read_config(args.config))
        doc["lp"] = {"feasible": lp.feasible, "boundary_tight": lp.boundary_tight,
                     "checks": [vars(c) for c in lp.notes]}
    _emit(doc, args)
    for c in report.notes:
        log.info("%-22s %s  %s", c.name, "PASS" if c.passed else "FAIL", c.detail)
    return EXIT_OK if report.dp_pass else EXIT_DP


def cmd_simulate(args) -> int:
    _need(args, "seed", "epsilon", "sigma")
    profile = parse_profile(args.profile)
    root = RandomStream(args.seed, "simulate")
    data = generate_synthetic(profile, root.child("synthetic"))
    run = run_pipeline(data, args.epsilon, args.sigma, args.l, args.seed, split_fraction=args.split_frac, k=profile.k)
    retention = measure_retention(data, run.randomized, run.matrix, run.pipeline.partition.mapping)
    emp = empirical_transition(run.matrix, args.draws, root.child("empirical"))
    rr = build_rr_matrix(profile.k, args.epsilon)
    rr_diff = float(np.max(np.abs(run.matrix.p - rr.p))) if run.matrix.shape == rr.shape else math.inf
    doc = {
        "manifest": _manifest(args, run.manifest),
        "s2_empty": not run.pipeline.partition.s2,
        "max_abs_diff_to_rr": rr_diff if math.isfinite(rr_diff) else "inf",
        "retention": retention.to_dict(),
        "empirical_max_tv": emp.max_tv,
        "dp": check_label_dp(run.matrix, args.epsilon).to_dict(),
    }
    _emit(doc, args)
    log.info("S2=%s overall retention %.4f, max TV %.4g", sorted(run.pipeline.partition.s2),
             retention.overall_retention, emp.max_tv)
    return EXIT_OK


def cmd_compare(args) -> int:
    _need(args, "epsilon")
    k, eps = args.k, args.epsilon
    prior = bio.read_prior(args.prior) if args.prior else PriorDistribution.from_counts(np.arange(k, 0, -1) ** 2)
    diffs = [
        check_unification("RR", k=k, epsilon=eps, blocks=1),
        check_unification("RR", k=k, epsilon=eps, blocks=2),
        check_unification("RRWithPrior", prior=prior, epsilon=eps),
    ]
    for m in (d for d in range(1, k + 1) if k % d == 0):
        diffs.append(check_unification("RRonBins", k=k, bin_count=m, epsilon=eps, blocks=1))
        if m > 1:
            diffs.append(check_unification("RRonBins", k=k, bin_count=m, epsilon=eps, blocks=2))
    diffs.append(check_unification("RPWithPrior-discretized", epsilon=eps, step=args.step))
    doc = [{"name": d.name, "blocks": d.blocks, "max_abs_diff": d.max_abs_diff, "passed": d.passed, **d.details}
           for d in diffs]
    _emit(doc, args)
    for d in diffs:
        log.info("%-24s blocks %d  diff %.3g  %s", d.name, d.blocks, d.max_abs_diff, "PASS" if d.passed else "FAIL")
    return EXIT_OK if all(d.passed for d in diffs) else EXIT_MISMATCH


COMMANDS = {
    "estimate-prior": cmd_estimate_prior,
    "partition": cmd_partition,
    "matrix": cmd_matrix,
    "randomize": cmd_randomize,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.debug or args.command in ("verify", "compare") else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"blockrr {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (BlockRRError, OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
