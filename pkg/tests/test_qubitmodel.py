import math

import numpy as np
import pytest

from snsqkd.qubitmodel import (
    even_parity_survivor,
    make_sigma,
    odd_parity_survivor,
    phase_error,
    pure_state_parity_errors,
    verify_iteration_inequality,
)


class TestMakeSigma:
    def test_trace_and_hermiticity(self):
        state = make_sigma(math.pi / 3.0, 0.2, 0.7)
        assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(state.rho, state.rho.conj().T)

    def test_positive_semidefinite(self):
        state = make_sigma(math.pi / 3.0, 0.2, 0.7)
        eigvals = np.linalg.eigvalsh(state.rho)
        assert eigvals.min() >= -1e-14

    def test_pure_state_is_rank_one(self):
        state = make_sigma(math.pi / 4.0, 0.5, 0.0)
        eigvals = np.sort(np.linalg.eigvalsh(state.rho))
        assert eigvals[-1] == pytest.approx(1.0, abs=1e-12)
        assert abs(eigvals[:-1]).max() < 1e-12

    def test_positivity_guard(self):
        with pytest.raises(ValueError):
            make_sigma(math.pi / 4.0, 0.6, 0.0)
        with pytest.raises(ValueError):
            make_sigma(math.pi / 8.0, 0.4, 0.0)  # limit is sin*cos ~ 0.354
        with pytest.raises(ValueError):
            make_sigma(math.pi / 4.0, -0.1, 0.0)


class TestPhaseError:
    def test_pure_bell(self):
        assert phase_error(make_sigma(math.pi / 4.0, 0.5, 0.0)) == pytest.approx(0.0, abs=1e-12)

    def test_classical_mixture(self):
        assert phase_error(make_sigma(math.pi / 3.0, 0.0, 0.0)) == pytest.approx(0.5, abs=1e-12)

    def test_direct_value(self):
        value = phase_error(make_sigma(math.pi / 4.0, 0.3, math.pi / 3.0))
        assert value == pytest.approx(0.35, abs=1e-12)


class TestOddParitySurvivor:
    def test_pure_state_error_free_any_phase(self):
        for beta in (0.0, 0.4, 1.9, math.pi, 5.0):
            _, e_odd, _ = odd_parity_survivor(make_sigma(math.pi / 4.0, 0.5, beta))
            assert e_odd == pytest.approx(0.0, abs=1e-12)

    def test_classical_mixture(self):
        _, e_odd, _ = odd_parity_survivor(make_sigma(math.pi / 3.0, 0.0, 0.0))
        assert e_odd == pytest.approx(0.5, abs=1e-12)

    def test_closed_form_value(self):
        _, e_odd, p_pass = odd_parity_survivor(make_sigma(math.pi / 4.0, 0.2, 1.1))
        assert e_odd == pytest.approx(0.5 * (1.0 - 0.04 / 0.25), abs=1e-12)
        assert p_pass == pytest.approx(0.5, abs=1e-12)  # 2*cos^2*sin^2 at pi/4

    def test_beta_independence(self):
        values = [
            odd_parity_survivor(make_sigma(1.1, 0.21, beta))[1]
            for beta in np.linspace(0.0, 2.0 * math.pi, 40)
        ]
        assert max(values) - min(values) <= 1e-12

    def test_interior_point_bound(self):
        _, e_odd, _ = odd_parity_survivor(make_sigma(math.pi / 6.0, 0.1, math.pi / 2.0))
        assert e_odd == pytest.approx(0.47333333333333333, abs=1e-12)
        e_bar = 0.5 * (1.0 - 2.0 * 0.1)
        assert e_odd <= 2.0 * e_bar * (1.0 - e_bar) + 1e-12  # 0.48

    def test_degenerate_theta(self):
        with pytest.raises(ValueError):
            odd_parity_survivor(make_sigma(0.0, 0.0, 0.0))


class TestEvenParitySurvivor:
    def test_closed_form(self):
        theta, alpha, beta = 1.0, 0.3, 0.8
        _, e_even, p_pass = even_parity_survivor(make_sigma(theta, alpha, beta))
        c4s4 = math.cos(theta) ** 4 + math.sin(theta) ** 4
        expected = (c4s4 - 2.0 * alpha**2 * math.cos(2.0 * beta)) / (2.0 * c4s4)
        assert e_even == pytest.approx(expected, abs=1e-12)
        assert p_pass == pytest.approx(c4s4, abs=1e-12)

    def test_branch_probabilities_sum_to_one(self):
        state = make_sigma(0.9, 0.15, 0.3)
        _, _, p_odd = odd_parity_survivor(state)
        _, _, p_even = even_parity_survivor(state)
        assert p_odd + p_even == pytest.approx(1.0, abs=1e-12)


class TestPureFamilyCounterexample:
    def test_odd_error_free_even_not(self):
        for phi in np.linspace(0.05, math.pi / 2.0 - 0.05, 15):
            e_odd, e_even = pure_state_parity_errors(float(phi))
            assert e_odd == pytest.approx(0.0, abs=1e-12)
            assert e_even > 1e-4

    def test_even_branch_functional_form(self):
        # the even-parity survivor carries a doubled phase: error sin^2(phi)
        for phi in (0.1, 0.4, 1.0, 1.4):
            _, e_even = pure_state_parity_errors(phi)
            assert e_even == pytest.approx(math.sin(phi) ** 2, abs=1e-12)


def test_iteration_inequality_small_grid():
    report = verify_iteration_inequality(20, 20, 20, matrix_stride=5)
    assert report.passed
    assert report.max_violation <= 1e-12
    assert report.max_matrix_mismatch <= 1e-12
    assert report.max_beta_spread <= 1e-12
    assert report.grid_points == 20**3


def test_equality_at_balanced_theta():
    # the bound is tight exactly where cos^2*sin^2 reaches 1/4
    for alpha in (0.1, 0.3, 0.45):
        _, e_odd, _ = odd_parity_survivor(make_sigma(math.pi / 4.0, alpha, 0.0))
        e_bar = 0.5 * (1.0 - 2.0 * alpha)
        assert e_odd == pytest.approx(2.0 * e_bar * (1.0 - e_bar), abs=1e-12)
