import math

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import gammaln, ndtr

from sojourn_clt import hermite as H
from sojourn_clt.errors import ToleranceNotReachedError

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


def phi(x):
    return math.exp(-0.5 * x * x) * PHI0


# hard-coded probabilists' polynomials up to degree 6
EXPLICIT = [
    lambda x: 1.0,
    lambda x: x,
    lambda x: x ** 2 - 1.0,
    lambda x: x ** 3 - 3.0 * x,
    lambda x: x ** 4 - 6.0 * x ** 2 + 3.0,
    lambda x: x ** 5 - 10.0 * x ** 3 + 15.0 * x,
    lambda x: x ** 6 - 15.0 * x ** 4 + 45.0 * x ** 2 - 15.0,
]


class TestHermite:
    def test_trivial_values(self):
        assert H.hermite(0, 7.3) == 1.0
        assert H.hermite(3, 1.0) == -2.0
        assert H.hermite(4, 0.0) == 3.0

    def test_matches_explicit_polynomials(self):
        xs = np.linspace(-4.0, 4.0, 100)
        for n, poly in enumerate(EXPLICIT):
            for x in xs:
                expected = poly(float(x))
                got = H.hermite(n, float(x))
                assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_parity(self):
        for n in range(0, 12):
            for x in (0.3, 1.7, 2.9):
                left = H.hermite(n, -x)
                right = (-1.0) ** n * H.hermite(n, x)
                assert left == pytest.approx(right, rel=1e-14)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            H.hermite(-1, 0.0)

    def test_orthogonality_under_gaussian_weight(self):
        nodes, weights = hermegauss(200)
        weights = weights / math.sqrt(2.0 * math.pi)
        for m in range(13):
            hm = np.array([H.hermite(m, float(x)) for x in nodes])
            for n in range(m, 13):
                hn = np.array([H.hermite(n, float(x)) for x in nodes])
                integral = float(np.dot(weights, hm * hn))
                expected = math.factorial(n) if m == n else 0.0
                assert integral == pytest.approx(expected, abs=1e-8 * max(1.0, expected))


class TestHermiteScaled:
    def test_trivial_and_derived_values(self):
        assert H.hermite_scaled(0, 0.0) == 1.0
        expected = math.exp(-0.25) * (-2.0) / math.sqrt(6.0)
        assert H.hermite_scaled(3, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_even_order_at_zero_against_log_domain_double_factorial(self):
        # He_{2m}(0) = (-1)^m (2m-1)!!
        m = 1000
        log_dd = gammaln(2 * m + 1) - m * math.log(2.0) - gammaln(m + 1)
        expected = (-1.0) ** m * math.exp(log_dd - 0.5 * gammaln(2 * m + 1))
        got = H.hermite_scaled(2000, 0.0)
        assert abs(got) <= 1.0
        assert got == pytest.approx(expected, rel=1e-10)

    def test_finite_at_extreme_arguments(self):
        for x in (50.0, -50.0, 37.5):
            v = H.hermite_scaled(10_000, x)
            assert math.isfinite(v)
            assert abs(v) < 10.0

    def test_matches_direct_formula_at_moderate_order(self):
        for n in (1, 5, 12, 25):
            for x in (-2.3, 0.4, 3.1):
                direct = (
                    math.exp(-x * x / 4.0)
                    * H.hermite(n, x)
                    / math.sqrt(math.factorial(n))
                )
                assert H.hermite_scaled(n, x) == pytest.approx(direct, rel=1e-11, abs=1e-300)

    def test_parity(self):
        for n in (3, 8, 501):
            v1 = H.hermite_scaled(n, 1.8)
            v2 = H.hermite_scaled(n, -1.8)
            assert v1 == pytest.approx((-1.0) ** n * v2, rel=1e-12)


class TestChaosCoefficient:
    def test_trivial_values(self):
        assert H.chaos_coefficient(1, 0.0).value == pytest.approx(PHI0, rel=1e-15)
        assert H.chaos_coefficient(2, 0.0).value == 0.0
        assert H.chaos_coefficient(2, 1.0).value == pytest.approx(phi(1.0) / 2.0, rel=1e-14)

    @pytest.mark.parametrize("u", [-2.0, 0.0, 0.7, 2.5])
    def test_direct_formula_up_to_order_30(self, u):
        for n in range(1, 31):
            expected = phi(u) * H.hermite(n - 1, u) / math.factorial(n)
            got = H.chaos_coefficient(n, u).value
            assert got == pytest.approx(expected, rel=1e-12, abs=1e-300)

    def test_log_domain_path_continuous_at_switchover(self):
        # n = 31..40 take the log-domain path; check against exact factorials
        for n in range(31, 41):
            for u in (0.6, 2.2):
                expected = phi(u) * H.hermite(n - 1, u) / math.factorial(n)
                got = H.chaos_coefficient(n, u).value
                assert got == pytest.approx(expected, rel=1e-10)

    def test_squared_term_identity(self):
        for n in range(1, 40):
            for u in (0.0, 1.3):
                c = H.chaos_coefficient(n, u).value
                expected = math.factorial(n) * c * c
                assert H.squared_coefficient_term(n, u) == pytest.approx(
                    expected, rel=1e-9, abs=1e-300
                )

    def test_scaled_envelope_stays_bounded(self):
        # phi(u)|He_{n-1}(u)|/sqrt((n-1)!) < K for the measured K ~ 0.399
        for u in (0.0, 1.0, 3.0):
            for n in range(1, 400):
                v = math.sqrt(H.squared_coefficient_term(n, u) * n)
                assert v < 0.4


class TestIndicatorVarianceSeries:
    @pytest.mark.parametrize("u", [0.0, 0.5, 1.0, 2.0, 3.0])
    def test_matches_tail_product_oracle(self, u):
        q = float(ndtr(-u))  # complementary-error-function oracle
        assert H.indicator_variance_series(u, 1e-8) == pytest.approx(
            q * (1.0 - q), abs=1e-8
        )

    def test_u0_quarter(self):
        assert H.indicator_variance_series(0.0, 1e-8) == pytest.approx(0.25, abs=1e-8)

    def test_frozen_value_u2(self):
        # oracle value: ndtr(-2) * (1 - ndtr(-2))
        assert H.indicator_variance_series(2.0, 1e-8) == pytest.approx(
            0.022232563444524612, abs=1e-8
        )

    def test_high_level_vanishes(self):
        assert H.indicator_variance_series(8.0, 1e-8) < 1e-14

    def test_unreachable_tolerance_raises(self):
        with pytest.raises(ToleranceNotReachedError):
            H.indicator_variance_series(0.0, 1e-8, max_order=512)

    def test_invalid_tolerance_rejected(self):
        with pytest.raises(ValueError):
            H.indicator_variance_series(0.0, 0.0)


class TestMehlerCovariance:
    def test_trivial_values(self):
        assert H.mehler_covariance(1, 0.5) == pytest.approx(0.5)
        assert H.mehler_covariance(2, 0.5) == pytest.approx(0.5)
        assert H.mehler_covariance(3, -1.0) == pytest.approx(-6.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            H.mehler_covariance(1, 1.5)
        with pytest.raises(ValueError):
            H.mehler_covariance(0, 0.5)

    def test_overflow_to_inf(self):
        assert H.mehler_covariance(200, 1.0) == math.inf


class TestChaosVarianceInequality:
    def test_p2_exact(self):
        cert = H.chaos_variance_inequality(2)
        assert (cert.lhs, cert.rhs, cert.holds) == (2, 9, True)

    def test_p3_exact(self):
        cert = H.chaos_variance_inequality(3)
        assert (cert.lhs, cert.rhs, cert.holds) == (14, 81, True)

    def test_holds_through_p50(self):
        for p in range(2, 51):
            cert = H.chaos_variance_inequality(p)
            assert isinstance(cert.lhs, int) and isinstance(cert.rhs, int)
            assert cert.holds

    def test_small_p_rejected(self):
        with pytest.raises(ValueError):
            H.chaos_variance_inequality(1)


class TestMalliavinBound:
    def test_order2_window1(self):
        assert H.malliavin_derivative_variance_bound(2, 1.0, 1, 1.0).value == pytest.approx(32.0)

    def test_window_scaling(self):
        assert H.malliavin_derivative_variance_bound(2, 16.0, 1, 1.0).value == pytest.approx(2.0)

    def test_order3_exact_arithmetic(self):
        # 3^4 * (0!^2 C(2,0)^4 4! + 1!^2 C(2,1)^4 2!) = 81 * (24 + 32)
        got = H.malliavin_derivative_variance_bound(3, 1.0, 1, 1.0)
        assert got.value == pytest.approx(81.0 * 56.0, rel=1e-12)

    def test_overflow_keeps_exact_log(self):
        b = H.malliavin_derivative_variance_bound(400, 1.0, 1, 1.0)
        assert b.value == math.inf
        assert math.isfinite(b.log_value)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            H.malliavin_derivative_variance_bound(1, 1.0, 1, 1.0)
        with pytest.raises(ValueError):
            H.malliavin_derivative_variance_bound(2, 0.0, 1, 1.0)


class TestHermiteBoundScan:
    def test_k_hat_at_zero_level(self):
        scan = H.hermite_bound_scan([0.0], 200)
        # the sequence phi(0)(2m-1)!!/sqrt((2m)!) is decreasing: max sits at n=0
        assert scan.K_hat == pytest.approx(PHI0, abs=1e-12)

    def test_parity_of_scan(self):
        up = H.hermite_bound_scan([1.3], 150)
        down = H.hermite_bound_scan([-1.3], 150)
        assert up.K_hat == pytest.approx(down.K_hat, rel=1e-13)

    def test_en1_constants_cover_grid(self):
        scan = H.hermite_bound_scan([0.0, 1.0], 120)
        assert set(scan.en1_constants) == {0.0, 1.0}
        assert all(v > 0.0 for v in scan.en1_constants.values())

    def test_en3_trace_values_near_limit(self):
        scan = H.hermite_bound_scan([0.0], 400)
        ns = [n for n, _ in scan.en3_ratio_trace]
        assert ns == sorted(ns) and ns[-1] == 400
        for _, ratio in scan.en3_ratio_trace:
            assert 0.7 < ratio < 1.0

    def test_small_scan_rejected(self):
        with pytest.raises(ValueError):
            H.hermite_bound_scan([0.0], 99)
