#!/usr/bin/env python3
# Building covariance functions out of smaller ones.
#
# Sums and products of valid kernels are valid kernels, so a handful of
# stationary building blocks is enough to describe a trend with a cycle
# on top. Trees can be built with operators or parsed from text.

import numpy as np

from kernelgp import gather, kernel_matrix, parse_kernel, periodic, rq, se

# A locally periodic component (SE x PERIODIC) plus a slow trend plus
# medium-term irregularities.
built = se(theta=0.002) * periodic(theta_l=0.26) + se(theta=0.0005) + rq(theta_l=2.0, amplitude=0.2)
parsed = parse_kernel("SE(theta=0.002) * PERIODIC(theta_l=0.26) + SE(theta=0.0005) + RQ(theta_l=2, amplitude=0.2)")
print("same tree from operators and from text:", built == parsed)
print("canonical text:", built)

# Every hyperparameter has a path, bounds, and an optimizer transform.
layout = gather(built)
for path, lo, hi, tr in zip(layout.paths, layout.lower, layout.upper, layout.transforms):
    print(f"  {path:<16} [{lo:g}, {hi:g}]  {tr}")

# The Gram matrix of any such tree is positive semi-definite.
x = np.arange(49.0)[:, None]
K, _ = kernel_matrix(built, x)
eig = np.linalg.eigvalsh(0.5 * (K + K.T))
print(f"smallest eigenvalue / largest diagonal: {eig[0] / K.diagonal().max():.2e}")

# Correlation with the point x = 0 shows the three ingredients: a
# decaying cycle of about 12 units on top of a slowly decaying floor.
row = K[0] / K[0, 0]
for xi, r in zip(x[::6, 0], row[::6]):
    print(f"  k(0, {xi:5.1f}) / k(0, 0) = {r:.3f}")
