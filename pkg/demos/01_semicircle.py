"""The semicircle law in closed form, checked against brute-force quadrature.

Run: python demos/01_semicircle.py
"""
import numpy as np
from scipy import integrate

from sparse_lsc import classical_locations, count_sc, m_sc, n_sc, rho_sc

# m_sc is the Stieltjes transform of rho_sc
for z in (2j, 1 + 0.1j, -2 + 0.01j):
    quad = sum(integrate.quad(lambda x, part=part: part(rho_sc(x) / (x - z)), -2, 2, limit=400)[0]
               * unit for part, unit in ((np.real, 1), (np.imag, 1j)))
    print(f"z = {z}:  m_sc = {m_sc(z):.10f}   quadrature = {quad:.10f}")

# the integrated density and its quantiles
print(f"\nn_sc(1) = {n_sc(1.0):.10f}")
g = classical_locations(10)
print("classical locations, N = 10:", np.round(g, 4))
print(f"expected eigenvalue count in (-1, 1] for N = 4000: {count_sc(-1, 1, 4000):.3f}")
