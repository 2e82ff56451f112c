"""Eigenvalues sit near their classical locations; eigenvectors are spread out.

Run: python demos/04_rigidity_delocalization.py
"""
import math

import numpy as np

from sparse_lsc import EnsembleParams, RngStream, sample_erdos_renyi
from sparse_lsc.spectra import delocalization_stats, dos_compare, eigh, rigidity_stats

N = 1500
params = EnsembleParams(N=N, q=N ** (1 / 3))
A, H, f = sample_erdos_renyi(params, RngStream(3))
D = eigh(A)

r = rigidity_stats(D.eigenvalues)
print(f"sum over alpha < N of |mu - gamma|^2: {r.sum_sq:.3e}")
print(f"bulk median |mu - gamma|:            {r.bulk_median:.2e}   (N^(-2/3) = {N ** (-2 / 3):.2e})")
worst3 = np.argsort(-r.deviations)[:3] + 1
print("three largest deviations at alpha =", sorted(worst3.tolist()), f"of N = {N}")

worst, per_alpha = delocalization_stats(D)
print(f"\nmax over alpha < N of sqrt(N) |v|_inf: {worst:.2f}   (log N)^2 = {math.log(N) ** 2:.1f}")
print(f"top eigenvector (the outlier):        {per_alpha[-1]:.3f}")

c = dos_compare(D, -1, 1)
print(f"\neigenvalues in (-1, 1]: {c.count}, semicircle predicts {c.predicted:.1f}")
