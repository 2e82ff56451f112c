"""How close is the empirical Stieltjes transform to m_sc, down to small eta?

Prints |m - m_sc| against the error size of the local law (polylog factors
dropped) on a grid of spectral parameters for one sample.

Run: python demos/03_local_law.py
"""
import numpy as np

from sparse_lsc import EnsembleParams, RngStream, sample_centered
from sparse_lsc.resolvent import lsc_scan

N, q = 1500, 10
H = sample_centered(EnsembleParams(N=N, q=q, kind="CenteredSparse"), RngStream(0))
grid = [complex(E, eta) for eta in (1.0, 0.1, 0.01) for E in (-2.5, -2.0, 0.0, 1.0, 2.0)]
rows = lsc_scan(H, grid, q)

print(f"{'E':>6} {'eta':>6} {'|m - m_sc|':>12} {'bound':>10} {'ratio':>7} {'max_ij':>8}")
for r in rows:
    print(f"{r['E']:6.2f} {r['eta']:6.2f} {r['lambda']:12.2e} {r['bound_m']:10.2e} "
          f"{r['ratio_m']:7.3f} {max(r['lambda_d'], r['lambda_o']):8.3f}")
print("worst ratio:", f"{max(r['ratio_m'] for r in rows):.3f}")
print("max entrywise |G_ij - delta_ij m_sc| over the grid:",
      f"{np.max([max(r['lambda_d'], r['lambda_o']) for r in rows]):.3f}")
