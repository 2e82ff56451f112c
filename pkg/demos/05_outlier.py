"""The largest eigenvalue of H + f|e><e|: location, eigenvector and fluctuations.

Also shows the rank-one secular solver reproducing a dense eigensolver.

Run: python demos/05_outlier.py
"""
import math

import numpy as np

from sparse_lsc import EnsembleParams, RngStream, assemble_A, eigh, sample_centered, secular_solve
from sparse_lsc.spectra import check_interlacing, clt_experiment, top_eigen_report

N, q, f = 800, 10, 5.0
params = EnsembleParams(N=N, q=q, f=f, kind="CenteredSparse")
H = sample_centered(params, RngStream(0))
DH = eigh(H)
A = assemble_A(H, f)
DA = eigh(A)

w = (DH.vectors.sum(axis=0) / math.sqrt(N)) ** 2
mus = secular_solve(DH.eigenvalues, w, f)
print(f"secular solver vs dense: max diff {np.abs(mus - DA.eigenvalues).max():.1e}")
print("eigenvalues of A interlace those of H:", check_interlacing(DH.eigenvalues, mus)[0])

rep = top_eigen_report(DA, f)
print(f"\nmu_max   {rep.mu_max:.4f}   predicted {rep.predicted_mu:.4f}")
print(f"<v, e>   {rep.overlap:.4f}   predicted {rep.predicted_overlap:.4f}")
print(f"|v - e|  {rep.l2_to_e:.4f}   predicted {rep.predicted_l2:.4f}")

clt = clt_experiment(EnsembleParams(N=400, q=10, f=20.0, kind="CenteredSparse"), trials=200)
print(f"\nfluctuations at f = 20 over {clt.trials} samples: var*N/2 = {clt.scaled_variance:.3f}, "
      f"skewness = {clt.skewness:.3f}, excess kurtosis = {clt.excess_kurtosis:.3f}")
