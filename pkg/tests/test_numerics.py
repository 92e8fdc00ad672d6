import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berryline.errors import BadInput, InvalidPanelCount, NoBracket, NoConvergence, NotHermitian
from berryline.models import ThreeLevelModel, TwoLevelModel, three_level_hamiltonian, two_level_hamiltonian
from berryline.numerics import (
    eig_hermitian,
    eig_hermitian_batch,
    fit_loglog,
    fix_phases,
    integrate_closed,
    solve_scalar,
)


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.conj().T


def assert_eigensystem(H, es):
    norm = np.linalg.norm(H, 2)
    for k in range(len(es.values)):
        v = es.vectors[:, k]
        assert np.linalg.norm(H @ v - es.values[k] * v) <= 1e-12 * (1 + norm)
    gram = es.vectors.conj().T @ es.vectors
    assert np.max(np.abs(gram - np.eye(len(es.values)))) <= 1e-12
    assert np.all(np.diff(es.values) >= 0)


class TestEigHermitian:
    def test_diagonal(self):
        es = eig_hermitian(two_level_hamiltonian(TwoLevelModel(1.0, 0.0), 0.37))
        np.testing.assert_allclose(es.values, [-1.0, 1.0], atol=1e-15)

    def test_pythagorean_gap(self):
        # lambda^2 = Rc^2 + r^2
        es = eig_hermitian(two_level_hamiltonian(TwoLevelModel(3.0, 4.0), 0.7))
        np.testing.assert_allclose(es.values, [-5.0, 5.0], rtol=1e-14)

    def test_three_level_spectrum(self):
        m = ThreeLevelModel(0.4, 0.3, 0.2, 0.1)
        s, c = math.sin(0.4), math.cos(0.4)
        mus = sorted([s / math.sqrt(3) + c, s / math.sqrt(3) - c, -2 * s / math.sqrt(3)])
        es = eig_hermitian(three_level_hamiltonian(m))
        np.testing.assert_allclose(es.values, mus, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_random_matrices(self, n):
        rng = np.random.default_rng(10 + n)
        for _ in range(1000):
            H = random_hermitian(rng, n)
            es = eig_hermitian(H)
            assert_eigensystem(H, es)
            np.testing.assert_allclose(es.values, np.linalg.eigvalsh(H), atol=1e-12 * (1 + np.abs(H).max()))

    @pytest.mark.parametrize("n", [2, 3])
    def test_batch_matches_single(self, n):
        rng = np.random.default_rng(3)
        Hs = np.stack([random_hermitian(rng, n) for _ in range(50)])
        values, vectors = eig_hermitian_batch(Hs)
        for H, w, V in zip(Hs, values, vectors):
            es = eig_hermitian(H)
            np.testing.assert_allclose(w, es.values, atol=1e-12)
            # both follow the same phase convention, so the vectors agree
            np.testing.assert_allclose(V, es.vectors, atol=1e-10)

    def test_phase_convention(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            es = eig_hermitian(random_hermitian(rng, 3))
            for k in range(3):
                v = es.vectors[:, k]
                j = int(np.argmax(np.abs(v)))
                assert v[j].imag == 0.0 and v[j].real > 0

    def test_phase_convention_idempotent(self):
        rng = np.random.default_rng(5)
        for n in (2, 3):
            for _ in range(200):
                V = eig_hermitian(random_hermitian(rng, n)).vectors
                assert np.array_equal(fix_phases(V), V)

    def test_degenerate_allowed(self):
        es = eig_hermitian(np.eye(3))
        np.testing.assert_allclose(es.values, [1, 1, 1])
        assert_eigensystem(np.eye(3), es)

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            eig_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))
        with pytest.raises(NotHermitian):
            eig_hermitian_batch(np.array([[[1.0, 1j], [1j, 1.0]]]))

    def test_bad_shape(self):
        with pytest.raises(BadInput):
            eig_hermitian(np.eye(4))


class TestIntegrateClosed:
    def test_zero_mean(self):
        assert abs(integrate_closed(lambda t: np.sin(2 * np.pi * t), 64)) < 1e-12

    def test_constant(self):
        assert integrate_closed(lambda t: 1.0, 8) == 1.0

    def test_cos_squared(self):
        assert abs(integrate_closed(lambda t: np.cos(2 * np.pi * t) ** 2, 256) - 0.5) < 1e-12

    @pytest.mark.parametrize("n", [0, 7, 7.5])
    def test_panel_count(self, n):
        with pytest.raises(InvalidPanelCount):
            integrate_closed(lambda t: t, n)

    def test_refinement_does_not_hurt(self):
        # smooth periodic integrand with known mean: exp(cos 2 pi t) -> I0(1)
        exact = 1.2660658777520082
        f = lambda t: np.exp(np.cos(2 * np.pi * t))
        errs = [abs(integrate_closed(f, n) - exact) for n in (8, 16, 32, 64)]
        for a, b in zip(errs, errs[1:]):
            assert b <= a + 1e-15


class TestSolveScalar:
    def test_square(self):
        assert abs(solve_scalar(lambda x: x * x, 4.0, (0.0, 10.0)) - 2.0) < 1e-12

    def test_identity_negative(self):
        assert abs(solve_scalar(lambda x: x, -3.0, (-10.0, 0.0)) + 3.0) < 1e-12

    def test_cubic(self):
        # g(2) = 8 + 2 = 10
        x = solve_scalar(lambda x: x**3 + x, 10.0, (0.0, 3.0))
        assert abs(x - 2.0) < 1e-12
        assert abs(x**3 + x - 10.0) <= 1e-12 * 11

    def test_decreasing(self):
        x = solve_scalar(lambda x: -x**3, -8.0, (0.0, 5.0))
        assert abs(x - 2.0) < 1e-12

    def test_no_bracket(self):
        with pytest.raises(NoBracket):
            solve_scalar(lambda x: x * x, -1.0, (0.0, 10.0))
        with pytest.raises(NoBracket):
            solve_scalar(lambda x: x, 0.0, (1.0, 1.0))

    def test_no_convergence_on_jump(self):
        with pytest.raises(NoConvergence):
            solve_scalar(lambda x: -1.0 if x < 0.3 else 1.0, 0.0, (0.0, 1.0))

    @given(
        lo=st.floats(min_value=-5.0, max_value=1.9),
        hi=st.floats(min_value=2.1, max_value=50.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_bracket_independence(self, lo, hi):
        x = solve_scalar(lambda x: x**3 + x, 10.0, (lo, hi))
        assert abs(x - 2.0) <= 1e-12


class TestFitLogLog:
    def test_square_law(self):
        xs = np.array([1e-4, 1e-3, 1e-2])
        fit = fit_loglog(xs, xs**2)
        assert abs(fit.slope - 2.0) < 1e-12
        assert fit.n_points == 3
        assert fit.rms_residual >= 0

    def test_linear_with_prefactor(self):
        xs = np.array([0.5, 2.0, 7.0, 30.0])
        fit = fit_loglog(xs, 5 * xs)
        assert abs(fit.slope - 1.0) < 1e-12
        assert abs(fit.intercept - math.log(5)) < 1e-12

    @pytest.mark.parametrize(
        "xs, ys",
        [([1.0, 2.0], [1.0]), ([1.0], [1.0]), ([1.0, -2.0], [1.0, 2.0]), ([1.0, 2.0], [0.0, 1.0])],
    )
    def test_bad_input(self, xs, ys):
        with pytest.raises(BadInput):
            fit_loglog(xs, ys)
