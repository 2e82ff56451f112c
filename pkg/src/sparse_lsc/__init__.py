"""Numerical laboratory for sparse random matrices and the local semicircle law."""
from .ensemble import (EnsembleParams, Kind, RngStream, assemble_A, sample_centered,
                       sample_erdos_renyi, unit_uniform_vector)
from .semicircle import SpectralParam, classical_locations, count_sc, m_sc, n_sc, rho_sc
from .spectra import SpectralDecomposition, eigh, secular_solve

__version__ = "0.1.0"
