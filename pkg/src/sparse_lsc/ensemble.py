"""Seeded sampling of sparse symmetric random matrices.

Three ensembles are provided:

================ =====================================================
kind             entries of the centred matrix ``H``
================ =====================================================
ErdosRenyi       ``a_ij - gamma*q/N`` with ``a_ij = gamma/q`` w.p. ``q^2/N``
CenteredSparse   same ``H`` as ErdosRenyi, returned on its own
BernoulliWigner  ``+-N^{-1/2}`` with equal probability
================ =====================================================

``gamma = (1 - q^2/N)^{-1/2}`` normalises the variance of every entry to ``1/N``.
The non-centred matrix is ``A = H + f |e><e|`` with ``e = N^{-1/2}(1, ..., 1)``.

Matrices are plain ``numpy`` arrays. They are built from a single upper
triangle that is mirrored, so ``M == M.T`` holds bit for bit.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Kind", "EnsembleParams", "RngStream", "unit_uniform_vector",
    "sample_erdos_renyi", "sample_centered", "sample_row", "assemble_A", "sample_pair",
    "empirical_moment_report", "MomentRow",
]


class Kind(str, enum.Enum):
    ERDOS_RENYI = "ErdosRenyi"
    CENTERED_SPARSE = "CenteredSparse"
    BERNOULLI_WIGNER = "BernoulliWigner"


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of one ensemble.

    ``f`` may be the string ``"auto"``, meaning ``f = gamma*q`` (the mean
    shift of the Erdos-Renyi adjacency matrix).
    """

    N: int
    q: float
    f: Union[float, str] = "auto"
    kind: Kind = Kind.ERDOS_RENYI
    zero_diagonal: bool = False
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        if not 1 <= self.q:
            raise ValueError(f"q must satisfy q >= 1, got {self.q!r}")
        if self.q ** 2 >= self.N:
            raise ValueError(
                f"q^2 < N is required (q={self.q}, N={self.N}); gamma diverges otherwise")
        if isinstance(self.f, str):
            if self.f != "auto":
                raise ValueError(f"f must be a nonnegative number or 'auto', got {self.f!r}")
        elif not self.f >= 0:
            raise ValueError(f"f must be nonnegative, got {self.f!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def p(self) -> float:
        return self.q ** 2 / self.N

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.p)

    @property
    def f_eff(self) -> float:
        if self.f == "auto":
            return self.gamma * self.q
        return float(self.f)


@dataclass(frozen=True)
class RngStream:
    """Independent random stream identified by ``(root_seed, stream_index)``.

    Draws come from PCG64 seeded through ``SeedSequence``, which gives the same
    sequence on every platform. Every call to :meth:`generator` starts the
    stream from the beginning.
    """

    root_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence([int(self.root_seed), int(self.stream_index)])
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _mirror_upper(M: np.ndarray) -> np.ndarray:
    U = np.triu(M)
    return U + np.triu(U, 1).T


def unit_uniform_vector(N: int) -> np.ndarray:
    """Return ``e = N^{-1/2} (1, ..., 1)``."""
    if N < 1:
        raise ValueError("N must be positive")
    return np.full(N, 1.0 / math.sqrt(N))


def sample_erdos_renyi(params: EnsembleParams, rng):
    """Sample a rescaled Erdos-Renyi adjacency matrix.

    Returns
    -------
    A : ndarray
        Entries ``gamma/q`` with probability ``q^2/N``, else 0.
    H : ndarray
        Centred part, ``A - gamma*q/N`` entrywise.
    f_eff : float
        ``gamma*q``, so that ``A = H + f_eff |e><e|``.
    """
    if params.kind not in (Kind.ERDOS_RENYI, Kind.CENTERED_SPARSE):
        raise ValueError(f"sample_erdos_renyi needs an Erdos-Renyi kind, got {params.kind.value}")
    N, q, gamma = params.N, params.q, params.gamma
    g = _as_generator(rng)
    hits = g.random((N, N)) < params.p
    A = _mirror_upper(np.where(hits, gamma / q, 0.0))
    if params.zero_diagonal:
        np.fill_diagonal(A, 0.0)
    f_eff = gamma * q
    H = A - f_eff / N
    return A, H, f_eff


def sample_centered(params: EnsembleParams, rng) -> np.ndarray:
    """Sample the centred matrix ``H`` of the configured kind."""
    if params.kind in (Kind.ERDOS_RENYI, Kind.CENTERED_SPARSE):
        return sample_erdos_renyi(params, rng)[1]
    N = params.N
    g = _as_generator(rng)
    signs = np.where(g.random((N, N)) < 0.5, 1.0, -1.0) / math.sqrt(N)
    H = _mirror_upper(signs)
    if params.zero_diagonal:
        np.fill_diagonal(H, 0.0)
    return H


def sample_row(params: EnsembleParams, rng) -> np.ndarray:
    """Sample one row ``(h_1j)_j`` of ``H`` without building the matrix.

    Entry ``j = 0`` is the diagonal entry. The row has the law of any row of
    :func:`sample_centered`, but the draws differ from the full-matrix sampler.
    """
    N = params.N
    u = _as_generator(rng).random(N)
    if params.kind is Kind.BERNOULLI_WIGNER:
        row = np.where(u < 0.5, 1.0, -1.0) / math.sqrt(N)
        if params.zero_diagonal:
            row[0] = 0.0
        return row
    a = np.where(u < params.p, params.gamma / params.q, 0.0)
    if params.zero_diagonal:
        a[0] = 0.0
    return a - params.gamma * params.q / N


def assemble_A(H: np.ndarray, f: float) -> np.ndarray:
    """Return ``H + f |e><e|``, i.e. ``H + f/N`` entrywise."""
    if f < 0:
        raise ValueError("f must be nonnegative")
    H = np.asarray(H, dtype=float)
    if f == 0:
        return H.copy()
    return H + f / H.shape[0]


def sample_pair(params: EnsembleParams, rng):
    """Sample ``(H, A, f)`` with ``A = H + f |e><e|`` and ``f = params.f_eff``.

    For the ErdosRenyi kind with ``f="auto"`` the adjacency matrix itself is
    returned as ``A``; otherwise ``A`` is assembled from ``H``.
    """
    if params.kind is Kind.ERDOS_RENYI and params.f == "auto":
        A, H, f = sample_erdos_renyi(params, rng)
        return H, A, f
    H = sample_centered(params, rng)
    f = params.f_eff
    return H, assemble_A(H, f), f


@dataclass(frozen=True)
class MomentRow:
    p: int
    sample_mean: float
    std_error: float
    bound: float

    @property
    def ratio(self) -> float:
        return self.sample_mean / self.bound


def empirical_moment_report(params: EnsembleParams, trials: int, p_max: int,
                            stream: int = 0):
    """Sample moments ``E|h_ij|^p`` over off-diagonal entries.

    Each row compares the sample mean with ``1/(N q^{p-2})``; for ``p = 2``
    this is the exact variance ``1/N``.

    Returns
    -------
    rows : list of MomentRow
    mean : (float, float)
        Sample mean of ``h_ij`` and its standard error.
    """
    if trials < 1000:
        raise ValueError("trials must be at least 1000")
    if not 2 <= p_max <= 10:
        raise ValueError("p_max must lie in [2, 10]")
    N, q = params.N, params.q
    iu = np.triu_indices(N, 1)
    powers = np.arange(2, p_max + 1)
    s1 = s1sq = 0.0
    sp = np.zeros(len(powers))
    spsq = np.zeros(len(powers))
    count = 0
    for t in range(trials):
        h = sample_centered(params, RngStream(params.seed, stream + t))[iu]
        s1 += h.sum()
        s1sq += h @ h
        absp = np.abs(h)[None, :] ** powers[:, None]
        sp += absp.sum(axis=1)
        spsq += (absp * absp).sum(axis=1)
        count += h.size
    rows = []
    for k, p in enumerate(powers):
        mean = sp[k] / count
        var = max(spsq[k] / count - mean ** 2, 0.0)
        rows.append(MomentRow(int(p), mean, math.sqrt(var / count), 1.0 / (N * q ** (p - 2))))
    m1 = s1 / count
    se1 = math.sqrt(max(s1sq / count - m1 ** 2, 0.0) / count)
    return rows, (m1, se1)
