"""
From noisy counts to a partition
================================

A 1% slice of the imbalanced CIFAR-10 profile is enough for a usable prior;
the weight-matrix rule then separates the six large classes from the four
small ones.
"""
import numpy as np

from blockrr import RandomStream, estimate_prior, partition_from_prior
from blockrr.simulate import CIFAR10_2, ClassCountProfile, generate_synthetic

stream = RandomStream(2024)
data = generate_synthetic(ClassCountProfile(CIFAR10_2), stream.child("data"))
d1 = data.labels[: len(data) // 100]

for eps in (1.0, 8.0):
    prior = estimate_prior(d1, eps, 10, stream.child(f"prior-{eps}"))
    print(f"eps={eps}: prior", np.round(prior.probs, 3))
    for sigma in (1.2, 0.2):
        cfg = partition_from_prior(prior, eps, sigma, l=5)
        print(f"   sigma={sigma}: S1={sorted(cfg.s1)} S2={sorted(cfg.s2)} l={cfg.l}")
