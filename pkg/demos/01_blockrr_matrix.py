"""
A first BlockRR matrix
======================

Four labels, the first two frequent (S1), the last two rare (S2), one label of
Delta, eps = ln 2.
"""
import math

import numpy as np

from blockrr import PartitionConfig, build_blockrr_matrix, check_label_dp, solve_beta_gamma

cfg = PartitionConfig.make(4, [0, 1], math.log(2), l=1)
bg = solve_beta_gamma(cfg)
print("beta  =", bg.beta, "(3/14 =", 3 / 14, ")")
print("gamma =", bg.gamma, "(5/28 =", 5 / 28, ")")

m = build_blockrr_matrix(cfg)
np.set_printoptions(precision=4, suppress=True)
print(m.p)

# rare labels put 1/|S~| on Delta and e^eps * gamma on themselves
print("row 2:", m.row(2), "sums to", m.row(2).sum())

rep = check_label_dp(m, cfg.epsilon)
print("largest column ratio", rep.max_ratio, "bound", rep.epsilon_bound, "pass", rep.dp_pass)
