"""Closed-form semicircle law.

All functions accept scalars or arrays and broadcast like numpy ufuncs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralParam", "DomainSpec", "rho_sc", "m_sc", "n_sc", "classical_location",
    "classical_locations", "kappa", "count_sc",
]


@dataclass(frozen=True)
class SpectralParam:
    """Spectral parameter ``z = E + i*eta`` with ``eta > 0``."""

    E: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")

    @property
    def z(self) -> complex:
        return complex(self.E, self.eta)

    @classmethod
    def from_complex(cls, z: complex) -> "SpectralParam":
        return cls(float(np.real(z)), float(np.imag(z)))


@dataclass(frozen=True)
class DomainSpec:
    """The rectangle ``|E| <= sigma, eta_min <= eta <= eta_max``."""

    sigma: float = 3.0
    eta_min: float = 1e-3
    eta_max: float = 3.0

    def __post_init__(self):
        if self.sigma < 3:
            raise ValueError("sigma must be at least 3")
        if not 0 < self.eta_min <= self.eta_max:
            raise ValueError("need 0 < eta_min <= eta_max")

    def contains(self, E, eta) -> bool:
        E, eta = np.asarray(E), np.asarray(eta)
        return bool(np.all(np.abs(E) <= self.sigma)
                    and np.all((eta >= self.eta_min) & (eta <= self.eta_max)))


def rho_sc(x):
    """Semicircle density ``sqrt([4 - x^2]_+) / (2 pi)``."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2.0 * np.pi)


def m_sc(z):
    """Stieltjes transform of the semicircle law.

    Solves ``m^2 + z m + 1 = 0`` and returns the root with ``Im m > 0``. The
    two roots multiply to 1, so the small root is taken as ``-2/(z + s)`` with
    ``s = +-sqrt(z^2 - 4)`` signed to make ``|z + s|`` large; this avoids the
    cancellation in ``(-z + s)/2`` for large ``|z|``.
    """
    z = np.asarray(z, dtype=complex)
    s = np.sqrt(z - 2.0) * np.sqrt(z + 2.0)
    t = np.where(np.abs(z + s) >= np.abs(z - s), z + s, z - s)
    m = -2.0 / t
    return m[()] if m.ndim == 0 else m


def n_sc(E):
    """Integrated semicircle density ``int_{-inf}^E rho_sc``."""
    E = np.asarray(E, dtype=float)
    x = np.clip(E, -2.0, 2.0)
    out = 0.5 + x * np.sqrt(4.0 - x * x) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi
    out = np.where(E <= -2.0, 0.0, np.where(E >= 2.0, 1.0, out))
    return out[()] if out.ndim == 0 else out


def classical_locations(N: int, alpha=None) -> np.ndarray:
    """Classical eigenvalue locations ``gamma_alpha`` with ``n_sc(gamma_alpha) = alpha/N``.

    ``alpha`` defaults to ``1, ..., N``. Found by bisection; ``n_sc`` has zero
    derivative at the edges, which rules out Newton there.
    """
    if alpha is None:
        alpha = np.arange(1, N + 1)
    alpha = np.asarray(alpha)
    if np.any(alpha < 1) or np.any(alpha > N):
        raise ValueError("alpha must lie in 1..N")
    target = alpha / N
    lo = np.full(target.shape, -2.0)
    hi = np.full(target.shape, 2.0)
    # invariant: n_sc(hi) >= target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = n_sc(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(hi))):
            break
    # n_sc rounds to 1 just below the edge, so pin the top location
    return np.where(alpha == N, 2.0, hi)


def classical_location(alpha: int, N: int) -> float:
    return float(classical_locations(N, np.array([alpha]))[0])


def kappa(E):
    """Distance ``||E| - 2|`` to the spectral edge."""
    return np.abs(np.abs(E) - 2.0)


def count_sc(E1: float, E2: float, N: int) -> float:
    """Expected eigenvalue count ``N * int_{E1}^{E2} rho_sc``."""
    if not E1 < E2:
        raise ValueError(f"need E1 < E2, got ({E1}, {E2})")
    return float(N * (n_sc(E2) - n_sc(E1)))
