"""
How l trades frequent against rare labels
=========================================

Raising l moves mass toward the frequent block: beta grows, gamma shrinks,
and they start equal at l = 0 (plain RR).
"""
import math

from blockrr import PartitionConfig, check_monotonicity

for k, s1 in [(4, [0, 1]), (10, range(6))]:
    cfg = PartitionConfig.make(k, s1, 1.0)
    rep = check_monotonicity(cfg)
    print(f"K={k}, |S1|={len(cfg.s1)}")
    for l, b, g in zip(rep.ls, rep.betas, rep.gammas):
        print(f"  l={l}: e^eps*beta={math.e * b:.4f}  e^eps*gamma={math.e * g:.4f}")
    print("  monotone:", rep.passed)
