"""
One mechanism, four special cases
=================================

Each baseline is rebuilt from its own definition and compared entrywise with
BlockRR under the matching configuration.
"""
import numpy as np

from blockrr import PriorDistribution, check_unification

eps = 1.0
prior = PriorDistribution.from_counts([50, 49, 47, 46, 45, 48, 6, 5, 7, 4])

for name, params in [
    ("RR", dict(k=10, blocks=1)),
    ("RR", dict(k=10, blocks=2, s1=range(6))),
    ("RRWithPrior", dict(prior=prior)),
    ("RRonBins", dict(k=10, bin_count=5, blocks=1)),
    ("RRonBins", dict(k=10, bin_count=5, blocks=2)),
    ("RPWithPrior-discretized", dict(step=1e-3)),
]:
    d = check_unification(name, epsilon=eps, **params)
    print(f"{name:24s} blocks {d.blocks}  max |diff| = {d.max_abs_diff:.1e}  {d.details or ''}")
