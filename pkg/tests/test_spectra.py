import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_lsc.ensemble import EnsembleParams, RngStream, assemble_A, sample_centered
from sparse_lsc.semicircle import classical_locations
from sparse_lsc.spectra import (EigenSolverError, check_interlacing, clt_experiment,
                                clt_statistics, delocalization_stats, dos_compare, eigh,
                                eigvalsh, norm_check, rigidity_stats, secular_function,
                                secular_solve, top_eigen_report)

GOLDEN = (1 + math.sqrt(5)) / 2


def _weights(D):
    return (D.vectors.sum(axis=0) / math.sqrt(D.N)) ** 2


class TestEigh:
    def test_diagonal(self):
        D = eigh(np.diag([3.0, 1.0, 2.0]))
        assert np.array_equal(D.eigenvalues, [1.0, 2.0, 3.0])
        assert np.array_equal(np.abs(D.vectors), np.eye(3)[:, [1, 2, 0]])

    def test_sign_rule(self):
        D = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(D.eigenvalues, [-1, 1])
        # ties go to the lowest index, which is then positive
        assert np.all(D.vectors[0] > 0)

    def test_contract_on_random(self):
        H = sample_centered(EnsembleParams(N=120, q=5), RngStream(4))
        D = eigh(H)
        V = D.vectors
        assert np.abs(H @ V - V * D.eigenvalues).max() <= 1e-12
        assert np.abs(V.T @ V - np.eye(120)).max() <= 1e-12
        idx = np.argmax(np.abs(V), axis=0)
        assert np.all(V[idx, np.arange(120)] > 0)
        assert np.allclose(eigvalsh(H), D.eigenvalues, atol=1e-12)

    def test_non_finite(self):
        with pytest.raises(EigenSolverError):
            eigh(np.array([[np.nan, 0.0], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            eigvalsh(np.zeros((2, 3)))

    def test_completeness_of_overlaps(self):
        H = sample_centered(EnsembleParams(N=200, q=8), RngStream(1))
        D = eigh(assemble_A(H, 5.0))
        w = _weights(D)
        assert w.sum() == pytest.approx(1.0, abs=1e-10)
        assert w[:-1].sum() <= 10 / 25


class TestSecular:
    def test_pure_rank_one(self):
        assert np.allclose(secular_solve([0.0, 0.0], [0.0, 1.0], 1.0), [0.0, 1.0])

    def test_golden_ratio(self):
        mus, res = secular_solve([-1.0, 1.0], [0.5, 0.5], 1.0, return_residuals=True)
        assert np.allclose(mus, [1 - GOLDEN, GOLDEN], atol=1e-14)
        assert res.max() <= 1e-14

    def test_equation_holds(self):
        lam = np.array([-1.0, 0.0, 0.5])
        w = np.array([0.2, 0.3, 0.5])
        mus = secular_solve(lam, w, 2.0)
        assert np.allclose(secular_function(mus, lam, w), 0.5, atol=1e-9)

    def test_matches_eigh(self):
        H = sample_centered(EnsembleParams(N=50, q=4), RngStream(3))
        D = eigh(H)
        mus = secular_solve(D.eigenvalues, _weights(D), 2.0)
        direct = eigvalsh(assemble_A(H, 2.0))
        assert np.abs(mus - direct).max() <= 1e-8
        assert check_interlacing(D.eigenvalues, direct)[0]

    def test_coincident_poles(self):
        mus = secular_solve([0.0, 0.0, 1.0], [0.25, 0.25, 0.5], 1.0)
        M = np.diag([0.0, 0.0, 1.0]) + np.outer(*[np.sqrt([0.25, 0.25, 0.5])] * 2)
        assert np.allclose(mus, np.linalg.eigvalsh(M), atol=1e-12)

    @pytest.mark.parametrize("args", [([0.0, 1.0], [0.5, 0.6], 1.0), ([1.0, 0.0], [0.5, 0.5], 1.0),
                                      ([0.0, 1.0], [0.5, 0.5], 0.0), ([0.0], [0.5, 0.5], 1.0)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            secular_solve(*args)


class TestInterlacing:
    def test_examples(self):
        assert check_interlacing([0.0, 0.0], [0.0, 1.0]) == (True, 0.0)
        ok, worst = check_interlacing([0.0, 0.0], [-1.0, 0.0])
        assert not ok and worst == 1.0


class TestDelocalization:
    def test_flat_vectors(self):
        D = eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
        top, per = delocalization_stats(D, exclude_top=False)
        assert top == pytest.approx(1.0) and np.allclose(per, 1.0)

    def test_localized(self):
        D = eigh(np.diag([1.0, 2.0, 3.0, 4.0]))
        assert delocalization_stats(D)[0] == pytest.approx(2.0)


class TestTopEigen:
    def test_pure_rank_one(self):
        rep = top_eigen_report(eigh(assemble_A(np.zeros((6, 6)), 5.0)), 5.0)
        assert rep.mu_max == pytest.approx(5.0, abs=1e-13)
        assert rep.overlap == pytest.approx(1.0) and rep.l2_to_e <= 1e-7
        assert rep.predicted_mu == 5.2 and rep.meaningful

    def test_flags_small_f(self):
        H = sample_centered(EnsembleParams(N=50, q=4), RngStream(0))
        assert not top_eigen_report(eigh(assemble_A(H, 1.05)), 1.05).meaningful

    def test_gap_opens(self):
        params = EnsembleParams(N=1000, q=10, f=1.5, kind="CenteredSparse")
        gaps = [top_eigen_report(eigh(assemble_A(sample_centered(params, RngStream(0, t)), 1.5)),
                                 1.5).gap for t in range(3)]
        assert min(gaps) > 0.05


class TestClt:
    def test_degenerate(self):
        rep = clt_statistics(np.full(10, 5.0), 100)
        assert rep.scaled_variance == 0.0 and rep.skewness == 0.0

    def test_scaling(self):
        x = np.array([0.0, 1.0, 2.0])
        assert clt_statistics(x, 10).scaled_variance == pytest.approx(5.0)

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            clt_experiment(EnsembleParams(N=10, q=2, f=5), 199)

    def test_small_run(self):
        rep = clt_experiment(EnsembleParams(N=100, q=5, f=20, kind="CenteredSparse"), 200)
        assert rep.trials == 200 and not rep.large_f
        assert 0.5 <= rep.scaled_variance <= 2.0


class TestDos:
    def test_full_spectrum(self):
        H = sample_centered(EnsembleParams(N=300, q=8), RngStream(0))
        assert dos_compare(eigh(H), -3, 3).count == 300

    def test_half_open(self):
        c = dos_compare(np.array([-1.0, 0.0, 1.0]), -1.0, 1.0)
        assert c.count == 2

    def test_flag(self):
        assert dos_compare(np.zeros(10), 1.9999, 2.0).flagged


class TestRigidity:
    def test_exact_locations(self):
        N = 50
        mus = np.append(classical_locations(N, np.arange(1, N)), 7.0)
        r = rigidity_stats(mus)
        assert r.sum_sq == 0.0 and r.deviations.shape == (N - 1,)

    def test_ref_curve(self):
        r = rigidity_stats(np.linspace(-2, 2, 8))
        assert r.ref_curve[0] == pytest.approx(8 ** (-2 / 3))
        assert r.ref_curve[3] == pytest.approx(8 ** (-2 / 3) * 4 ** (-1 / 3))


class TestNorm:
    def test_zero(self):
        rep = norm_check(np.zeros(5), 100, 4)
        assert rep.norm == 0.0 and rep.passes

    def test_sample(self):
        rep = norm_check(eigvalsh(sample_centered(EnsembleParams(N=1000, q=10), RngStream(0))),
                         1000, 10)
        assert 1.9 <= rep.norm <= rep.weak_bound
        assert rep.weak_bound == pytest.approx(2 + math.log(1000) / math.sqrt(10))


@settings(max_examples=40, deadline=None)
@given(N=st.integers(2, 40), seed=st.integers(0, 2 ** 32), f=st.floats(0.01, 50))
def test_secular_matches_eigh_property(N, seed, f):
    H = sample_centered(EnsembleParams(N=N, q=1.2, kind="CenteredSparse"), RngStream(seed))
    D = eigh(H)
    w = _weights(D)
    w /= w.sum()
    mus = secular_solve(D.eigenvalues, w, f)
    direct = eigvalsh(assemble_A(H, f))
    assert np.abs(mus - direct).max() <= 1e-8 * max(1.0, f)
    assert check_interlacing(D.eigenvalues, direct)[0]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=30), st.integers(0, 1000))
def test_dos_permutation_invariant(values, seed):
    x = np.array(values)
    perm = np.random.default_rng(seed).permutation(x)
    assert dos_compare(x, -1, 1).count == dos_compare(perm, -1, 1).count
