import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_lsc.ensemble import (EnsembleParams, Kind, RngStream, assemble_A,
                                 empirical_moment_report, sample_centered, sample_erdos_renyi,
                                 sample_pair, sample_row, unit_uniform_vector)


class TestParams:
    def test_gamma_normalises_variance(self):
        p = EnsembleParams(N=100, q=5)
        assert p.p == pytest.approx(0.25)
        # Var(a_ij) = gamma^2/q^2 * p (1 - p) = 1/N
        assert p.gamma ** 2 / p.q ** 2 * p.p * (1 - p.p) == pytest.approx(1 / 100)

    def test_auto_shift(self):
        p = EnsembleParams(N=100, q=5)
        assert p.f_eff == pytest.approx(5 / math.sqrt(0.75))
        assert EnsembleParams(N=100, q=5, f=2).f_eff == 2.0

    @pytest.mark.parametrize("kw", [dict(N=1, q=1), dict(N=100, q=10), dict(N=100, q=0.5),
                                    dict(N=100, q=5, f=-1), dict(N=100, q=5, f="big"),
                                    dict(N=10.5, q=2), dict(N=100, q=5, seed=-1)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            EnsembleParams(**kw)

    def test_q_squared_message(self):
        with pytest.raises(ValueError, match=r"q\^2 < N"):
            EnsembleParams(N=1000, q=40)

    def test_kind_from_string(self):
        assert EnsembleParams(N=10, q=2, kind="BernoulliWigner").kind is Kind.BERNOULLI_WIGNER


def test_unit_vector():
    e = unit_uniform_vector(7)
    assert np.allclose(e, 7 ** -0.5) and np.linalg.norm(e) == pytest.approx(1.0)


class TestErdosRenyi:
    def test_shift_is_exact(self):
        params = EnsembleParams(N=60, q=4, seed=3)
        A, H, f = sample_erdos_renyi(params, RngStream(3))
        assert np.array_equal(A - f / 60, H)
        assert f == pytest.approx(params.gamma * params.q)

    def test_entries_and_symmetry(self):
        params = EnsembleParams(N=100, q=5)
        A, H, _ = sample_erdos_renyi(params, RngStream(0))
        assert np.array_equal(A, A.T) and np.array_equal(H, H.T)
        assert set(np.unique(A)) <= {0.0, params.gamma / 5}
        assert np.allclose(sorted(np.unique(H)), [-0.05774, 0.17321], atol=1e-5)

    def test_zero_diagonal(self):
        A, _, _ = sample_erdos_renyi(EnsembleParams(N=30, q=3, zero_diagonal=True), RngStream(1))
        assert np.all(np.diag(A) == 0)

    def test_rejects_wigner_kind(self):
        with pytest.raises(ValueError):
            sample_erdos_renyi(EnsembleParams(N=10, q=2, kind="BernoulliWigner"), RngStream(0))

    def test_deterministic(self):
        params = EnsembleParams(N=40, q=3)
        a = sample_erdos_renyi(params, RngStream(9, 4))[0]
        b = sample_erdos_renyi(params, RngStream(9, 4))[0]
        c = sample_erdos_renyi(params, RngStream(9, 5))[0]
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_accepts_generator(self):
        params = EnsembleParams(N=20, q=2)
        a = sample_erdos_renyi(params, RngStream(2).generator())[0]
        assert np.array_equal(a, sample_erdos_renyi(params, RngStream(2))[0])
        with pytest.raises(TypeError):
            sample_erdos_renyi(params, 2)


class TestCentered:
    def test_centered_sparse_matches_er(self):
        params = EnsembleParams(N=50, q=4, kind="CenteredSparse")
        H = sample_centered(params, RngStream(5))
        assert np.array_equal(H, sample_erdos_renyi(params, RngStream(5))[1])

    def test_bernoulli_wigner(self):
        H = sample_centered(EnsembleParams(N=2, q=1, kind="BernoulliWigner"), RngStream(0))
        assert np.allclose(np.abs(H), 0.5 ** 0.5) and np.array_equal(H, H.T)

    def test_bernoulli_zero_diagonal(self):
        params = EnsembleParams(N=9, q=2, kind="BernoulliWigner", zero_diagonal=True)
        assert np.all(np.diag(sample_centered(params, RngStream(0))) == 0)


class TestRow:
    def test_row_values(self):
        params = EnsembleParams(N=100, q=5)
        row = sample_row(params, RngStream(0))
        assert row.shape == (100,)
        assert np.allclose(sorted(np.unique(row)), [-0.05774, 0.17321], atol=1e-5)

    def test_row_variance(self):
        params = EnsembleParams(N=1000, q=10)
        rows = np.array([sample_row(params, RngStream(0, t)) for t in range(200)])
        assert rows.var() * 1000 == pytest.approx(1.0, abs=0.03)


class TestAssemble:
    def test_examples(self):
        assert np.allclose(assemble_A(np.zeros((2, 2)), 1.0), 0.5)
        H = np.array([[1.0, 2.0], [2.0, 3.0]])
        out = assemble_A(H, 0)
        assert np.array_equal(out, H) and out is not H

    def test_round_trip(self):
        H = sample_centered(EnsembleParams(N=30, q=3), RngStream(0))
        assert np.allclose(assemble_A(H, 4.0) - 4.0 / 30, H, atol=1e-15)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            assemble_A(np.zeros((2, 2)), -1)

    def test_pair(self):
        params = EnsembleParams(N=30, q=3, f=2.0, kind="CenteredSparse")
        H, A, f = sample_pair(params, RngStream(0))
        assert f == 2.0 and np.array_equal(A, assemble_A(H, 2.0))
        H, A, f = sample_pair(EnsembleParams(N=30, q=3), RngStream(0))
        assert f == pytest.approx(3 / math.sqrt(0.7))


class TestMoments:
    def test_second_moment(self):
        params = EnsembleParams(N=100, q=5, kind="CenteredSparse")
        rows, (mean, se) = empirical_moment_report(params, trials=1000, p_max=6)
        assert [r.p for r in rows] == [2, 3, 4, 5, 6]
        assert abs(rows[0].sample_mean - 0.01) <= 3 * rows[0].std_error
        assert abs(mean) <= 3 * se
        assert rows[2].bound == pytest.approx(1 / (100 * 25))

    def test_higher_moments_bounded(self):
        params = EnsembleParams(N=100, q=5, kind="CenteredSparse")
        rows, _ = empirical_moment_report(params, trials=1000, p_max=10)
        # E|h|^p / (1/(N q^{p-2})) stays O(1)^p
        assert all(r.ratio <= 2.0 ** r.p for r in rows)

    @pytest.mark.parametrize("kw", [dict(trials=999, p_max=4), dict(trials=1000, p_max=1),
                                    dict(trials=1000, p_max=11)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            empirical_moment_report(EnsembleParams(N=10, q=2), **kw)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(4, 60), data=st.data())
def test_symmetric_and_shifted(N, data):
    q = data.draw(st.floats(1.0, math.sqrt(N) * 0.99))
    seed = data.draw(st.integers(0, 2 ** 63))
    params = EnsembleParams(N=N, q=q, seed=seed)
    A, H, f = sample_erdos_renyi(params, RngStream(seed))
    assert np.array_equal(A, A.T)
    assert np.array_equal(A - f / N, H)
