"""Green's functions, minors and exact resolvent identities.

Every identity comes as a ``verify_*`` function returning a residual. The
identities hold in exact arithmetic for any real symmetric matrix, so a
residual far above rounding level means a bug, not a statistical effect.

Minor resolvents are always computed from the minor matrix itself, never by
chaining the identities being checked.

Indices are 0-based. Minors keep the original index names: ``minor_resolvent``
returns an ``N x N`` array whose rows and columns in ``T`` are zero.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ensemble import assemble_A, unit_uniform_vector
from .semicircle import SpectralParam, kappa, m_sc
from .spectra import eigh

__all__ = [
    "IllConditioned", "Resolvent", "Minor", "ControlParams", "PiResult",
    "green_function", "green_function_direct", "minor", "minor_resolvent",
    "control_params", "verify_ward", "verify_minor_identity", "compute_Z",
    "compute_Z_centered", "verify_gij_formula", "verify_self_consistent",
    "verify_minor_trace", "verify_perturbation_identity", "graded_component",
    "graded_components", "verify_graded_resolution", "graded_bound_constant",
    "lsc_bounds", "lsc_scan", "compute_pi", "pi_bound", "im_diag_profile",
]

ILL_CONDITIONED = 1e-12


class IllConditioned(ArithmeticError):
    """A resolvent entry used as a denominator is below 1e-12 in modulus."""


def _z(z) -> complex:
    if isinstance(z, SpectralParam):
        return z.z
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"spectral parameter needs Im z > 0, got {z}")
    return z


def _check_denominator(value, what):
    if abs(value) < ILL_CONDITIONED:
        raise IllConditioned(f"|{what}| = {abs(value):.3e} < {ILL_CONDITIONED:g}")


@dataclass(frozen=True)
class Resolvent:
    """``G(z) = (M - z)^{-1}`` together with ``m(z) = tr G / N``."""

    z: complex
    G: np.ndarray

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def eta(self) -> float:
        return self.z.imag

    @property
    def m(self) -> complex:
        return complex(np.trace(self.G)) / self.N

    def residual(self, M) -> float:
        M = np.asarray(M)
        return float(np.abs((M - self.z * np.eye(self.N)) @ self.G - np.eye(self.N)).max())


def green_function(M, z, decomposition=None) -> Resolvent:
    """Resolvent from the spectral decomposition ``sum u u^T / (lambda - z)``.

    Pass ``decomposition`` to reuse one eigendecomposition across many ``z``.
    """
    z = _z(z)
    D = decomposition if decomposition is not None else eigh(M)
    V = D.vectors
    G = (V / (D.eigenvalues - z)) @ V.T
    return Resolvent(z, G)


def green_function_direct(M, z) -> Resolvent:
    """Resolvent by a dense complex inverse; cross-check path."""
    z = _z(z)
    M = np.asarray(M, dtype=float)
    return Resolvent(z, np.linalg.inv(M - z * np.eye(M.shape[0])))


@dataclass(frozen=True)
class Minor:
    """A principal minor together with the original names of its indices."""

    matrix: np.ndarray
    index: np.ndarray

    def minor(self, T) -> "Minor":
        return minor(self, T)

    def position(self, i: int) -> int:
        pos = np.flatnonzero(self.index == i)
        if pos.size == 0:
            raise KeyError(f"index {i} has been removed")
        return int(pos[0])


def minor(M, T) -> Minor:
    """Remove the rows and columns named in ``T``."""
    if isinstance(M, Minor):
        base, names = M.matrix, M.index
    else:
        base = np.asarray(M)
        names = np.arange(base.shape[0])
    T = set(int(t) for t in T)
    if not T.issubset(set(names.tolist())):
        raise ValueError(f"T={sorted(T)} is not a subset of the remaining indices")
    if len(T) >= len(names):
        raise ValueError("cannot remove every index")
    keep = np.array([k for k, name in enumerate(names) if name not in T], dtype=int)
    return Minor(base[np.ix_(keep, keep)], names[keep])


def minor_resolvent(M, T, z) -> np.ndarray:
    """``G^{(T)}(z)`` embedded in an ``N x N`` array, zero on rows/columns in ``T``."""
    z = _z(z)
    M = np.asarray(M, dtype=float)
    N = M.shape[0]
    T = sorted(set(int(t) for t in T))
    out = np.zeros((N, N), dtype=complex)
    if not T:
        out[:] = np.linalg.inv(M - z * np.eye(N))
        return out
    if T[0] < 0 or T[-1] >= N:
        raise ValueError(f"T={T} has indices outside 0..{N - 1}")
    if len(T) == N:
        # empty minor: every sum over its indices is empty
        return out
    sub = minor(M, T)
    keep = sub.index
    out[np.ix_(keep, keep)] = np.linalg.inv(sub.matrix - z * np.eye(len(keep)))
    return out


@dataclass(frozen=True)
class ControlParams:
    lambda_o: float
    lambda_d: float
    lambda_: float
    psi: float


def control_params(R: Resolvent, msc=None) -> ControlParams:
    """Deviation of ``G`` from ``m_sc * I`` at one spectral parameter.

    ``lambda_o = max_{i != j} |G_ij|``, ``lambda_d = max_i |G_ii - m_sc|``,
    ``lambda_ = |m - m_sc|`` and ``psi = sqrt((lambda_ + Im m_sc) / (N eta))``.
    """
    if msc is None:
        msc = m_sc(R.z)
    G = R.G
    N = R.N
    diag = np.diagonal(G)
    lam_d = float(np.abs(diag - msc).max())
    lam = abs(R.m - msc)
    if N > 1:
        off = np.abs(G - np.diag(diag))
        lam_o = float(off.max())
    else:
        lam_o = 0.0
    psi = math.sqrt((lam + msc.imag) / (N * R.eta))
    return ControlParams(lam_o, lam_d, lam, psi)


def verify_ward(R: Resolvent) -> float:
    """Max over ``i`` of ``|sum_j |G_ij|^2 - Im G_ii / eta|``."""
    lhs = np.sum(np.abs(R.G) ** 2, axis=1)
    return float(np.abs(lhs - np.diagonal(R.G).imag / R.eta).max())


def verify_minor_identity(M, z, i, j, k) -> float:
    """Residual of ``G_ij = G^{(k)}_ij + G_ik G_kj / G_kk``."""
    if k in (i, j):
        raise ValueError("need i, j != k")
    G = minor_resolvent(M, (), z)
    Gk = minor_resolvent(M, (k,), z)
    _check_denominator(G[k, k], "G_kk")
    return float(abs(G[i, j] - Gk[i, j] - G[i, k] * G[k, j] / G[k, k]))


def compute_Z(M, z, i, j) -> complex:
    """``Z_ij = h_i . G^{(ij)} h_j``, summed over ``k, l`` outside ``{i, j}``.

    For ``i == j`` this is ``Z_ii`` with the minor ``G^{(i)}``.
    """
    M = np.asarray(M, dtype=float)
    # the embedded minor vanishes on rows/columns i, j, which drops those terms
    Gm = minor_resolvent(M, {i, j}, z)
    return complex(M[i] @ Gm @ M[:, j])


def compute_Z_centered(M, z, i) -> complex:
    """``Z_i = sum_{k,l != i} (h_ik h_li - delta_kl / N) G^{(i)}_kl``."""
    M = np.asarray(M, dtype=float)
    N = M.shape[0]
    Gi = minor_resolvent(M, (i,), z)
    return complex(M[i] @ Gi @ M[:, i] - np.trace(Gi) / N)


def verify_gij_formula(M, z, i, j) -> float:
    """Residuals of ``G_ij = -G_ii G^{(i)}_jj (h_ij - Z_ij)`` and ``G_ii = 1/(h_ii - z - Z_ii)``."""
    if i == j:
        raise ValueError("need i != j")
    M = np.asarray(M, dtype=float)
    zc = _z(z)
    G = minor_resolvent(M, (), zc)
    Gi = minor_resolvent(M, (i,), zc)
    off = G[i, j] + G[i, i] * Gi[j, j] * (M[i, j] - compute_Z(M, zc, i, j))
    diag = G[i, i] - 1.0 / (M[i, i] - zc - compute_Z(M, zc, i, i))
    return float(max(abs(off), abs(diag)))


def verify_self_consistent(M, z, msc=None, indices=None) -> float:
    """Max residual of ``G_ii = 1 / (-z - m_sc - ([v] - Upsilon_i))``.

    ``Upsilon_i = h_ii - Z_i + A_i`` with ``A_i = N^{-1} sum_j G_ij G_ji / G_ii``
    and ``v_i = G_ii - m_sc``. The value of ``m_sc`` cancels, so any complex
    number may be supplied.
    """
    M = np.asarray(M, dtype=float)
    zc = _z(z)
    if msc is None:
        msc = m_sc(zc)
    N = M.shape[0]
    G = minor_resolvent(M, (), zc)
    diag = np.diagonal(G)
    v_mean = np.mean(diag - msc)
    worst = 0.0
    for i in range(N) if indices is None else indices:
        _check_denominator(G[i, i], "G_ii")
        A_i = np.sum(G[i, :] * G[:, i]) / (N * G[i, i])
        upsilon = M[i, i] - compute_Z_centered(M, zc, i) + A_i
        rhs = 1.0 / (-zc - msc - (v_mean - upsilon))
        worst = max(worst, abs(G[i, i] - rhs))
    return float(worst)


def verify_minor_trace(M, z, i) -> float:
    """Residual of ``m^{(i)} = m - N^{-1} sum_j G_ij G_ji / G_ii`` (both traces over ``N``)."""
    M = np.asarray(M, dtype=float)
    N = M.shape[0]
    G = minor_resolvent(M, (), z)
    Gi = minor_resolvent(M, (i,), z)
    _check_denominator(G[i, i], "G_ii")
    m = np.trace(G) / N
    mi = np.trace(Gi) / N
    return float(abs(mi - m + np.sum(G[i, :] * G[:, i]) / (N * G[i, i])))


def verify_perturbation_identity(H, f, z) -> float:
    """Residual of ``<e, G~ e>^{-1} = f + <e, G e>^{-1}`` with ``G~ = (H + f|e><e| - z)^{-1}``."""
    H = np.asarray(H, dtype=float)
    zc = _z(z)
    N = H.shape[0]
    e = unit_uniform_vector(N)
    I = np.eye(N)
    eGe = e @ np.linalg.solve(H - zc * I, e.astype(complex))
    eGte = e @ np.linalg.solve(assemble_A(H, f) - zc * I, e.astype(complex))
    return float(abs(1.0 / eGte - f - 1.0 / eGe))


def _graded_minors(M, z, i, j, S):
    S = tuple(sorted(set(int(s) for s in S)))
    if i in S or j in S:
        raise ValueError("need i, j outside S")
    if len(S) > 6:
        raise ValueError(f"|S| = {len(S)} > 6; 2^|S| minor resolvents would be computed")
    values = {}
    for r in range(len(S) + 1):
        for V in itertools.combinations(S, r):
            values[frozenset(V)] = minor_resolvent(M, V, z)[i, j]
    return S, values


def _combine(S, values, U):
    U = frozenset(U)
    rest = frozenset(S) - U
    total = 0j
    for r in range(len(U) + 1):
        for T in itertools.combinations(sorted(U), r):
            total += (-1) ** r * values[rest | frozenset(T)]
    return total


def graded_component(M, z, i, j, S, U) -> complex:
    """``G^{S,U}_ij = sum_{T subset U} (-1)^{|T|} G^{((S \\ U) u T)}_ij``."""
    S, values = _graded_minors(M, z, i, j, S)
    if not set(U).issubset(S):
        raise ValueError("U must be a subset of S")
    return complex(_combine(S, values, U))


def graded_components(M, z, i, j, S) -> dict:
    """All ``G^{S,U}_ij`` for ``U`` ranging over subsets of ``S``, keyed by frozenset."""
    S, values = _graded_minors(M, z, i, j, S)
    return {frozenset(U): complex(_combine(S, values, U))
            for r in range(len(S) + 1) for U in itertools.combinations(S, r)}


def verify_graded_resolution(M, z, i, j, S) -> float:
    """Residual of ``sum_{U subset S} G^{S,U}_ij = G_ij``."""
    comps = graded_components(M, z, i, j, S)
    Gij = minor_resolvent(M, (), z)[i, j]
    return float(abs(sum(comps.values()) - Gij))


def graded_bound_constant(components: dict, lambda_o: float) -> float:
    """Smallest ``C`` with ``|G^{S,U}| <= (C |U| lambda_o)^{|U|+1}`` for every nonempty ``U``."""
    worst = 0.0
    for U, value in components.items():
        u = len(U)
        if u == 0:
            continue
        worst = max(worst, abs(value) ** (1.0 / (u + 1)) / (u * lambda_o))
    return worst


def lsc_bounds(E, eta, N, q):
    """Local-law error sizes without polylog factors.

    Returns ``(bound_m, bound_ij)`` with
    ``bound_m = min(1/(q^2 sqrt(kappa + eta)), 1/q) + 1/(N eta)`` and
    ``bound_ij = 1/q + sqrt(Im m_sc / (N eta)) + 1/(N eta)``.
    """
    E = np.asarray(E, dtype=float)
    eta = np.asarray(eta, dtype=float)
    k = kappa(E)
    bound_m = np.minimum(1.0 / (q * q * np.sqrt(k + eta)), 1.0 / q) + 1.0 / (N * eta)
    bound_ij = 1.0 / q + np.sqrt(np.imag(m_sc(E + 1j * eta)) / (N * eta)) + 1.0 / (N * eta)
    return bound_m, bound_ij


def lsc_scan(M, grid, q, decomposition=None, offdiag=True) -> list:
    """Compare ``G(z)`` with the semicircle law on a grid of spectral parameters.

    One eigendecomposition serves the whole grid. ``lambda_`` and ``lambda_d``
    cost ``O(N^2)`` per point; ``lambda_o`` needs the full matrix (``O(N^3)``)
    and is skipped (NaN) when ``offdiag`` is false.

    Returns a list of dicts with keys ``E, eta, kappa, lambda, lambda_d,
    lambda_o, psi, bound_m, bound_ij, ratio_m, ratio_ij``.
    """
    M = np.asarray(M, dtype=float)
    N = M.shape[0]
    D = decomposition if decomposition is not None else eigh(M)
    lam, V = D.eigenvalues, D.vectors
    V2 = V * V
    rows = []
    for point in grid:
        z = _z(point)
        E, eta = z.real, z.imag
        msc = m_sc(z)
        w = 1.0 / (lam - z)
        m = w.mean()
        diag = V2 @ w
        lam_m = abs(m - msc)
        lam_d = float(np.abs(diag - msc).max())
        if offdiag and N > 1:
            G = (V * w) @ V.T
            np.fill_diagonal(G, 0.0)
            lam_o = float(np.abs(G).max())
        elif N == 1:
            lam_o = 0.0
        else:
            lam_o = math.nan
        bm, bij = lsc_bounds(E, eta, N, q)
        bm, bij = float(bm), float(bij)
        rows.append({
            "E": E, "eta": eta, "kappa": float(kappa(E)),
            "lambda": lam_m, "lambda_d": lam_d, "lambda_o": lam_o,
            "psi": math.sqrt((lam_m + msc.imag) / (N * eta)),
            "bound_m": bm, "bound_ij": bij,
            "ratio_m": lam_m / bm, "ratio_ij": max(lam_d, lam_o) / bij,
        })
    return rows


def im_diag_profile(M, E, ys, l, decomposition=None) -> np.ndarray:
    """``y * Im G_ll(E + i y)`` along ``ys``; nondecreasing in ``y`` for every ``l``."""
    D = decomposition if decomposition is not None else eigh(M)
    ys = np.asarray(ys, dtype=float)
    weights = D.vectors[l] ** 2
    # y Im G_ll = sum_a w_a y^2 / ((lam_a - E)^2 + y^2)
    d2 = (D.eigenvalues[None, :] - E) ** 2
    return (weights[None, :] * ys[:, None] ** 2 / (d2 + ys[:, None] ** 2)).sum(axis=1)


@dataclass(frozen=True)
class PiResult:
    value: complex
    bound: float

    @property
    def ratio(self) -> float:
        return abs(self.value) / self.bound


def pi_bound(z, N, q) -> float:
    """``1/q^2 + Im m_sc/(N eta) + 1/(N eta)^2``, polylog factor dropped."""
    z = _z(z)
    Neta = N * z.imag
    return 1.0 / q ** 2 + m_sc(z).imag / Neta + 1.0 / Neta ** 2


def compute_pi(H, f, z, q) -> PiResult:
    """``Pi = N^{-1} sum_{i != 0} sum_{k != i} G~^{(i)}_{0k} h_ki``.

    ``G~^{(i)}`` is the resolvent of the minor of ``A = H + f|e><e|`` with row
    and column ``i`` removed. Costs one linear solve of size ``N - 1`` per
    ``i``, so ``N`` is capped at 400.
    """
    H = np.asarray(H, dtype=float)
    N = H.shape[0]
    if N > 400:
        raise ValueError(f"N = {N} > 400; compute_pi needs N minor solves")
    zc = _z(z)
    A = assemble_A(H, f)
    total = 0j
    for i in range(1, N):
        keep = np.r_[0:i, i + 1:N]
        sub = A[np.ix_(keep, keep)] - zc * np.eye(N - 1)
        rhs = np.zeros(N - 1, dtype=complex)
        rhs[0] = 1.0
        # symmetric minor: column 0 of the inverse equals row 0
        row = np.linalg.solve(sub, rhs)
        total += row @ H[keep, i]
    return PiResult(complex(total / N), float(pi_bound(zc, N, q)))
