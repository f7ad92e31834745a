import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionsquid.corrections import (
    estimate,
    junction_array,
    leading_correction,
    required_N,
    required_N_for,
    taylor_coefficient,
    taylor_coefficients,
)
from ionsquid.drive import classical_solution
from ionsquid.params import paper_params

PAPER_LEADING = (1.3 * 0.08 * 1000) ** 2


class TestTaylor:
    def test_t0_values(self):
        c3, c4 = taylor_coefficients(0.08, 0.06, 0.0)
        assert 0.08 * c3 == pytest.approx(math.sqrt(0.0064 - 0.0036))
        assert 0.08 * c4 == pytest.approx(0.06)

    def test_undriven(self):
        x = np.linspace(0, 6, 7)
        c3, c4 = taylor_coefficients(0.08, 0.0, x)
        np.testing.assert_allclose(c3, 1.0)
        np.testing.assert_allclose(c4, 0.0)

    def test_quarter_phase(self):
        c3, c4 = taylor_coefficients(0.08, 0.06, math.pi / 2)
        assert c3 == pytest.approx(1.0) and c4 == pytest.approx(0.0, abs=1e-16)

    def test_domain(self):
        with pytest.raises(ValueError):
            taylor_coefficients(0.08, 0.09, 0.0)

    @settings(max_examples=50)
    @given(st.floats(1e-3, 1.0), st.floats(0, 1), st.floats(-10, 10))
    def test_unit_circle(self, beta, frac, x):
        c3, c4 = taylor_coefficients(beta, frac * beta, x)
        assert abs(c3**2 + c4**2 - 1) < 1e-12

    def test_matches_trajectory(self):
        d = classical_solution(0.06, 0.08, 1.0, n_samples=64)
        c3, c4 = taylor_coefficients(0.08, 0.06, d.omega_d * d.t)
        np.testing.assert_allclose(c3, np.sin(d.phi_c), atol=1e-14)
        np.testing.assert_allclose(c4, np.cos(d.phi_c), atol=1e-14)

    def test_general_k_cycle(self):
        x = 0.7
        c3, c4 = taylor_coefficients(0.08, 0.06, x)
        assert taylor_coefficient(3, 0.08, 0.06, x) == c3
        assert taylor_coefficient(4, 0.08, 0.06, x) == c4
        assert taylor_coefficient(5, 0.08, 0.06, x) == -c3
        assert taylor_coefficient(7, 0.08, 0.06, x) == c3


class TestLeading:
    def test_paper_value(self):
        e = leading_correction(paper_params(), gamma=1.3)
        assert e.leading_magnitude == pytest.approx(PAPER_LEADING, rel=1e-12)
        assert e.leading_magnitude == pytest.approx(1.08e4, rel=0.01)
        assert e.k_terms[3] == pytest.approx(e.leading_magnitude, rel=1e-12)

    def test_default_gamma_from_omega0(self):
        e = leading_correction(paper_params())
        assert e.gamma == pytest.approx(1.298, abs=1e-3)

    def test_gamma_from_floquet_w(self):
        from ionsquid.coupling import circuit_mode

        p = paper_params(eta=0.03)
        sol = circuit_mode(p, n_samples=64)
        e = leading_correction(p, sol)
        assert e.gamma > leading_correction(p).gamma  # drive softens the mode

    def test_zero_beta(self):
        e = estimate(0.0, 1.3, 1e-3)
        assert e.leading_magnitude == 0 and all(v == 0 for v in e.k_terms.values())

    def test_higher_orders_suppressed(self):
        e = estimate(0.08, 1.3, 1e-3, eta_over_beta=0.75)
        assert e.k_terms[8] < 1e-6 * e.k_terms[3]
        assert all(e.k_terms[k + 2] < e.k_terms[k] for k in range(3, 7))


class TestArray:
    def test_identity(self):
        p = paper_params()
        assert junction_array(p, 1, gamma=1.3) == leading_correction(p, gamma=1.3)

    @pytest.mark.parametrize("N", [2, 7, 100])
    def test_fourth_power(self, N):
        p = paper_params()
        one = leading_correction(p, gamma=1.3)
        many = junction_array(p, N, gamma=1.3)
        assert many.k_terms[3] / one.k_terms[3] == pytest.approx(N**-4, rel=1e-12)
        assert many.leading_magnitude * N**4 == pytest.approx(one.leading_magnitude, rel=1e-12)
        assert many.params_rescaled == pytest.approx((0.08 / N, 1.3 / N))

    def test_hundred_small(self):
        e = junction_array(paper_params(), 100, gamma=1.3)
        assert e.leading_magnitude == pytest.approx(1.08e-4, rel=0.01)

    @pytest.mark.parametrize("N", [0, -1, 2.5])
    def test_bad_N(self, N):
        with pytest.raises(ValueError):
            junction_array(paper_params(), N)


class TestRequiredN:
    @pytest.mark.parametrize("threshold,expected", [(1.0, 11), (1e-2, 33)])
    def test_paper(self, threshold, expected):
        assert required_N(paper_params(), threshold=threshold, gamma=1.3) == expected

    def test_zero_beta(self):
        assert required_N_for(0.0, 1.0) == 1

    @settings(max_examples=100)
    @given(st.floats(1e-3, 1e8), st.floats(1e-4, 1e2))
    def test_minimal(self, leading, threshold):
        N = required_N_for(leading, threshold)
        assert leading / N**4 < threshold
        if N > 1:
            assert leading / (N - 1) ** 4 >= threshold
