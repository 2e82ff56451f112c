"""Eigendecompositions, the rank-one secular solver and spectral statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .ensemble import EnsembleParams, RngStream, sample_pair
from .semicircle import classical_locations, count_sc

__all__ = [
    "EigenSolverError", "SpectralDecomposition", "TopEigReport", "CltReport",
    "DosComparison", "RigidityStats", "NormReport", "eigh", "eigvalsh",
    "secular_function", "secular_solve", "check_interlacing",
    "delocalization_stats", "top_eigen_report", "clt_statistics", "clt_experiment",
    "dos_compare", "rigidity_stats", "norm_check",
]


class EigenSolverError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues; column ``a`` of ``vectors`` is the eigenvector of ``eigenvalues[a]``.

    Each column is signed so that its entry of largest magnitude is positive
    (lowest index wins ties).
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def N(self) -> int:
        return self.eigenvalues.shape[0]


def _check_finite(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise EigenSolverError("matrix has non-finite entries")
    return M


def eigh(M) -> SpectralDecomposition:
    """Full symmetric eigendecomposition (LAPACK ``syevd`` via numpy)."""
    M = _check_finite(M)
    try:
        lam, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigh failed for N={M.shape[0]}, max|M|={np.abs(M).max():.3e}: {exc}") from exc
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return SpectralDecomposition(lam, V * signs)


def eigvalsh(M) -> np.ndarray:
    """Ascending eigenvalues only; about twice as fast as :func:`eigh`."""
    M = _check_finite(M)
    try:
        return np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigvalsh failed for N={M.shape[0]}: {exc}") from exc


def _eigenvalues(D):
    if isinstance(D, SpectralDecomposition):
        return D.eigenvalues
    return np.asarray(D, dtype=float)


def secular_function(mu, lambdas, weights):
    """``sum_a w_a / (mu - lambda_a)``, vectorised over ``mu``."""
    mu = np.asarray(mu, dtype=float)
    return (weights[None, :] / (mu[..., None] - lambdas[None, :])).sum(axis=-1)


DEFLATION = 1e-14


def secular_solve(lambdas, weights, f, return_residuals=False):
    """Eigenvalues of ``diag(lambdas) + f w^{1/2} (w^{1/2})^T`` from the secular equation.

    Roots of ``1/f = sum_a w_a / (mu - lambda_a)`` are bisected, one per gap
    between consecutive poles and one in ``(lambda_max, lambda_max + f]``.
    Poles with weight below 1e-14 are deflated (``mu = lambda`` exactly) and
    coincident poles are merged, which leaves one root pinned at the shared
    value.

    With ``return_residuals`` the second output holds, per root, the distance
    estimate ``|F(mu)| / |F'(mu)|`` with ``F = sum w/(mu - lambda) - 1/f``
    (zero for deflated roots).
    """
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if lambdas.shape != weights.shape or lambdas.ndim != 1:
        raise ValueError("lambdas and weights must be 1-d of equal length")
    if not f > 0:
        raise ValueError("f must be positive")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-8:
        raise ValueError("weights must be nonnegative and sum to 1")
    if np.any(np.diff(lambdas) < 0):
        raise ValueError("lambdas must be ascending")
    N = lambdas.size
    spread = max(lambdas[-1] - lambdas[0], f, 1.0)
    merge_tol = 1e-13 * spread

    deflated = []
    poles, pole_w = [], []
    for lam, w in zip(lambdas, weights):
        if w < DEFLATION:
            deflated.append(lam)
        elif poles and lam - poles[-1] <= merge_tol:
            pole_w[-1] += w
            deflated.append(lam)
        else:
            poles.append(lam)
            pole_w.append(w)
    poles = np.array(poles)
    pole_w = np.array(pole_w)
    k = poles.size

    roots = np.empty(0)
    if k:
        nudge = 1e-13 * spread
        lo = poles + nudge
        hi = np.append(poles[1:] - nudge, poles[-1] + f * pole_w.sum())
        lo = np.minimum(lo, hi)
        target = 1.0 / f
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            right = secular_function(mid, poles, pole_w) > target
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
            if np.all(hi - lo <= 2 * np.finfo(float).eps * np.maximum(np.abs(mid), 1.0)):
                break
        roots = 0.5 * (lo + hi)

    mus = np.sort(np.concatenate([roots, np.array(deflated)]))
    assert mus.size == N
    if not return_residuals:
        return mus
    res = np.zeros(N)
    if k:
        F = secular_function(roots, poles, pole_w) - 1.0 / f
        dF = (pole_w[None, :] / (roots[:, None] - poles[None, :]) ** 2).sum(axis=1)
        r = np.abs(F) / dF
        order = np.argsort(np.concatenate([roots, np.array(deflated)]), kind="stable")
        res = np.concatenate([r, np.zeros(len(deflated))])[order]
    return mus, res


def check_interlacing(lambdas, mus, slack=1e-10):
    """Check ``lambda_1 <= mu_1 <= lambda_2 <= ... <= lambda_N <= mu_N``.

    Returns ``(ok, worst_violation)``.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    mus = np.asarray(mus, dtype=float)
    if lambdas.shape != mus.shape:
        raise ValueError("lambdas and mus must have equal length")
    below = lambdas - mus
    above = mus[:-1] - lambdas[1:]
    worst = float(max(below.max(initial=0.0), above.max(initial=0.0), 0.0))
    return worst <= slack, worst


def delocalization_stats(D: SpectralDecomposition, exclude_top=True):
    """``sqrt(N) * ||v_a||_inf`` per eigenvector and its maximum.

    With ``exclude_top`` the maximum runs over ``a < N`` only.
    """
    N = D.N
    per_alpha = math.sqrt(N) * np.abs(D.vectors).max(axis=0)
    body = per_alpha[:-1] if exclude_top and N > 1 else per_alpha
    return float(body.max()), per_alpha


@dataclass(frozen=True)
class TopEigReport:
    mu_max: float
    overlap: float
    l2_to_e: float
    sup_norm_gap: float
    gap: float
    f: float
    meaningful: bool

    @property
    def predicted_mu(self) -> float:
        return self.f + 1.0 / self.f

    @property
    def predicted_overlap(self) -> float:
        return 1.0 - 1.0 / (2 * self.f ** 2)

    @property
    def predicted_l2(self) -> float:
        return 1.0 / self.f


def top_eigen_report(D: SpectralDecomposition, f: float, eps0: float = 0.1) -> TopEigReport:
    """Largest eigenpair of ``A`` against ``f + 1/f``, ``1 - 1/(2f^2)`` and ``1/f``.

    The report is always produced; ``meaningful`` is false when ``f < 1 + eps0``,
    where no outlier separates from the bulk.
    """
    N = D.N
    v = D.vectors[:, -1]
    e = np.full(N, 1.0 / math.sqrt(N))
    overlap = float(v @ e)
    if overlap < 0:
        v, overlap = -v, -overlap
    overlap = min(overlap, 1.0)
    gap = float(D.eigenvalues[-1] - D.eigenvalues[-2]) if N > 1 else math.inf
    return TopEigReport(
        mu_max=float(D.eigenvalues[-1]),
        overlap=overlap,
        l2_to_e=float(np.linalg.norm(v - e)),
        sup_norm_gap=float(np.abs(v - e).max()),
        gap=gap,
        f=float(f),
        meaningful=bool(f >= 1 + eps0),
    )


@dataclass(frozen=True)
class CltReport:
    trials: int
    mean: float
    scaled_variance: float
    skewness: float
    excess_kurtosis: float
    large_f: bool = True


def clt_statistics(mu_max, N: int) -> CltReport:
    """Moments of ``sqrt(N/2) (mu_max - mean)`` over trials.

    ``scaled_variance`` is the unbiased sample variance times ``N/2``.
    """
    x = np.asarray(mu_max, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two samples")
    var = float(np.var(x, ddof=1))
    if var == 0.0:
        skew = kurt = 0.0
    else:
        skew = float(stats.skew(x))
        kurt = float(stats.kurtosis(x))
    return CltReport(int(x.size), float(x.mean()), var * N / 2.0, skew, kurt)


def clt_experiment(params: EnsembleParams, trials: int, slack: float = 1.0) -> CltReport:
    """Fluctuation moments of the largest eigenvalue of ``A`` over ``trials`` samples.

    Trial ``t`` samples from ``RngStream(params.seed, t)``. ``large_f`` records
    whether ``f >= (log N)^(2 slack)``, the regime where Gaussian fluctuations
    of order ``N^{-1/2}`` are expected.
    """
    if trials < 200:
        raise ValueError("clt_experiment needs at least 200 trials")
    mu = np.empty(trials)
    f = params.f_eff
    for t in range(trials):
        _, A, f = sample_pair(params, RngStream(params.seed, t))
        mu[t] = eigvalsh(A)[-1]
    rep = clt_statistics(mu, params.N)
    large_f = bool(f >= math.log(params.N) ** (2 * slack))
    return CltReport(rep.trials, rep.mean, rep.scaled_variance, rep.skewness,
                     rep.excess_kurtosis, large_f)


@dataclass(frozen=True)
class DosComparison:
    count: int
    predicted: float
    rel_err: float
    flagged: bool


def dos_compare(D, E1: float, E2: float) -> DosComparison:
    """Eigenvalue count in ``(E1, E2]`` against ``N * int rho_sc``.

    ``flagged`` marks windows with predicted count below 1, where the relative
    error carries no information.
    """
    mus = _eigenvalues(D)
    N = mus.size
    predicted = count_sc(E1, E2, N)
    count = int(np.count_nonzero((mus > E1) & (mus <= E2)))
    flagged = predicted < 1
    rel = abs(count / predicted - 1.0) if predicted > 0 else math.inf
    return DosComparison(count, predicted, rel, flagged)


@dataclass(frozen=True)
class RigidityStats:
    sum_sq: float
    deviations: np.ndarray
    gamma: np.ndarray
    ref_curve: np.ndarray
    bulk_median: float


def rigidity_stats(mus, bulk=(0.25, 0.75)) -> RigidityStats:
    """Deviations ``|mu_a - gamma_a|`` for ``a = 1, ..., N-1``.

    The top eigenvalue is left out. ``ref_curve`` is ``N^{-2/3} a^{-1/3}`` with
    ``a^ = min(a, N - a)``; ``bulk_median`` is the median deviation over
    ``bulk[0] N <= a <= bulk[1] N``.
    """
    mus = _eigenvalues(mus)
    N = mus.size
    alpha = np.arange(1, N)
    gamma = classical_locations(N, alpha)
    dev = np.abs(mus[:-1] - gamma)
    ahat = np.minimum(alpha, N - alpha)
    ref = N ** (-2.0 / 3.0) * ahat ** (-1.0 / 3.0)
    in_bulk = (alpha >= bulk[0] * N) & (alpha <= bulk[1] * N)
    return RigidityStats(float(dev @ dev), dev, gamma, ref, float(np.median(dev[in_bulk])))


@dataclass(frozen=True)
class NormReport:
    norm: float
    weak_bound: float
    strong_bound: float

    @property
    def ratio(self) -> float:
        return (self.norm - 2.0) / (self.weak_bound - 2.0)

    @property
    def passes(self) -> bool:
        return self.norm <= self.weak_bound


def norm_check(D, N: int, q: float, slack: float = 1.0) -> NormReport:
    """``||H||`` against ``2 + (log N)^s q^{-1/2}`` and ``2 + (log N)^s (q^{-2} + N^{-2/3})``."""
    lam = _eigenvalues(D)
    norm = float(max(abs(lam[0]), abs(lam[-1])))
    L = math.log(N) ** slack
    return NormReport(norm, 2.0 + L / math.sqrt(q), 2.0 + L * (q ** -2 + N ** (-2.0 / 3.0)))
