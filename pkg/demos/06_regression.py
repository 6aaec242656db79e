"""
The continuous case
===================

The regression mechanism keeps 1/gamma_rp density near y and e^-eps/gamma_rp
elsewhere on the widened interval.
"""
import math

import numpy as np

from blockrr import RandomStream
from blockrr.core import RegressionMechanismConfig
from blockrr.mechanisms import sample_rpwithprior
from blockrr.verifier import check_rpwithprior_density

reg = RegressionMechanismConfig(0.0, 1.0, 0.1, math.log(2))
print("gamma_rp =", reg.gamma_rp)
print(check_rpwithprior_density(reg, 0.5))

draws = sample_rpwithprior(0.5, reg, RandomStream(3), size=10**6)
print("mass near y:", np.mean(np.abs(draws - 0.5) <= 0.1), "expected", 2 / 7)
hist, edges = np.histogram(draws, bins=12, range=(-0.1, 1.1), density=True)
for lo, h in zip(edges, hist):
    print(f"{lo:+.1f} {'#' * int(h * 20)}")
