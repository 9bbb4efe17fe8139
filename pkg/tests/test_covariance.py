import math

import numpy as np
import pytest
from scipy.integrate import quad

from sojourn_clt import covariance as C
from sojourn_clt.errors import DivergentIntegralError, FitMismatchError


@pytest.fixture
def exp_model():
    return C.powered_exponential(1.0, 1.0, 1)


@pytest.fixture
def gauss_model():
    return C.powered_exponential(2.0, 1.0, 1)


@pytest.fixture
def cauchy_model():
    return C.cauchy(1.0, 1.0, 1)


class TestModelValidation:
    def test_alpha_range(self):
        with pytest.raises(ValueError):
            C.powered_exponential(2.5)
        with pytest.raises(ValueError):
            C.powered_exponential(0.0)

    def test_cauchy_integrability(self):
        with pytest.raises(ValueError):
            C.cauchy(0.5, 1.0, 1)
        with pytest.raises(ValueError):
            C.cauchy(1.0, 1.0, 2)
        C.cauchy(1.01, 1.0, 2)  # fine

    def test_dimension_and_scale(self):
        with pytest.raises(ValueError):
            C.powered_exponential(1.0, 1.0, 3)
        with pytest.raises(ValueError):
            C.powered_exponential(1.0, -1.0, 1)

    def test_dict_round_trip(self, exp_model, cauchy_model):
        for m in (exp_model, cauchy_model):
            assert C.model_from_dict(C.model_to_dict(m)) == m

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            C.model_from_dict({"kind": "matern", "nu": 1.5})


class TestRho:
    def test_trivial_values(self, exp_model, cauchy_model):
        assert C.rho(exp_model, 0.0) == 1.0
        assert C.rho(exp_model, math.log(2.0)) == pytest.approx(0.5, rel=1e-15)
        assert C.rho(cauchy_model, 1.0) == pytest.approx(0.5, rel=1e-15)

    def test_unit_variance_and_bounded(self):
        for m in (
            C.powered_exponential(0.7, 2.0, 1),
            C.powered_exponential(2.0, 0.5, 2),
            C.cauchy(1.5, 3.0, 2),
        ):
            assert C.rho_radial(m, 0.0) == 1.0
            r = np.linspace(0.0, 50.0, 400)
            vals = C.rho_radial(m, r)
            assert np.all(np.abs(vals) <= 1.0)

    def test_symmetry(self, exp_model):
        ts = np.linspace(-5.0, 5.0, 41)
        for t in ts:
            assert C.rho(exp_model, float(t)) == C.rho(exp_model, float(-t))

    def test_vector_lags_in_2d(self):
        m = C.powered_exponential(1.0, 1.0, 2)
        assert C.rho(m, (0.0, 0.0)) == 1.0
        assert C.rho(m, (3.0, 4.0)) == pytest.approx(math.exp(-5.0), rel=1e-14)
        with pytest.raises(ValueError):
            C.rho(m, 1.0)

    def test_one_minus_rho_no_cancellation(self, cauchy_model):
        tiny = 1e-7
        v = C.one_minus_rho_radial(cauchy_model, tiny)
        assert v == pytest.approx(tiny * tiny, rel=1e-6)


class TestL1Norm:
    def test_closed_forms(self, exp_model, gauss_model, cauchy_model):
        assert C.l1_norm(exp_model) == pytest.approx(2.0, rel=1e-14)
        assert C.l1_norm(gauss_model) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert C.l1_norm(cauchy_model) == pytest.approx(math.pi, rel=1e-14)

    @pytest.mark.parametrize(
        "model",
        [
            C.powered_exponential(1.3, 0.8, 1),
            C.cauchy(0.8, 1.5, 1),
            C.powered_exponential(1.7, 1.2, 2),
            C.cauchy(1.4, 0.9, 2),
        ],
    )
    def test_closed_form_matches_quadrature(self, model):
        if model.d == 1:
            num, _ = quad(lambda t: C.rho_radial(model, t), 0.0, np.inf, limit=300)
            num *= 2.0
        else:
            num, _ = quad(
                lambda r: C.rho_radial(model, r) * r, 0.0, np.inf, limit=300
            )
            num *= 2.0 * math.pi
        assert C.l1_norm(model) == pytest.approx(num, rel=1e-8)


class TestRhoPowerIntegral:
    def test_closed_forms(self, exp_model, gauss_model):
        assert C.rho_power_integral(exp_model, 3) == pytest.approx(2.0 / 3.0, rel=1e-14)
        assert C.rho_power_integral(gauss_model, 4) == pytest.approx(
            math.sqrt(math.pi) / 2.0, rel=1e-14
        )

    def test_power_one_equals_l1_for_nonnegative_rho(self, exp_model, cauchy_model):
        for m in (exp_model, cauchy_model):
            assert C.rho_power_integral(m, 1) == pytest.approx(C.l1_norm(m), rel=1e-14)

    @pytest.mark.parametrize(
        "model",
        [
            C.powered_exponential(1.0, 1.0, 1),
            C.powered_exponential(2.0, 1.0, 1),
            C.cauchy(1.0, 1.0, 1),
            C.powered_exponential(1.5, 1.0, 2),
            C.cauchy(1.5, 1.0, 2),
        ],
    )
    def test_nonincreasing_in_power(self, model):
        vals = [C.rho_power_integral(model, n) for n in range(1, 11)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_quadrature_cross_check(self, cauchy_model):
        for n in (2, 5):
            num, _ = quad(lambda t: C.rho_radial(cauchy_model, t) ** n, 0.0, np.inf)
            assert C.rho_power_integral(cauchy_model, n) == pytest.approx(
                2.0 * num, rel=1e-9
            )

    def test_divergent_power_rejected(self):
        near_critical = C.cauchy(0.6, 1.0, 1)
        assert C.rho_power_integral(near_critical, 1) > 0.0
        with pytest.raises(DivergentIntegralError):
            # constructing rho^n weights for the chaos series never hits this
            # for valid models, but the contract is explicit
            C.rho_power_integral(C.cauchy(0.51, 1.0, 1), 0)


class TestTailL1:
    def test_exponential_tail(self, exp_model):
        mass = C.tail_l1(exp_model, 1.0)
        assert mass.value == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)

    def test_cauchy_tail_arctangent(self, cauchy_model):
        mass = C.tail_l1(cauchy_model, 10.0)
        assert mass.value == pytest.approx(
            2.0 * (math.pi / 2.0 - math.atan(10.0)), rel=1e-12
        )

    def test_witness_ratio_vanishes_for_exponential(self, exp_model):
        ratios = [m.log_weighted for m in C.condition3_audit(exp_model)]
        assert all(a > b for a, b in zip(ratios, ratios[1:])) or ratios[-1] == 0.0
        assert ratios[-1] < 1e-6

    @pytest.mark.parametrize(
        "model",
        [
            C.powered_exponential(1.0, 1.0, 1),
            C.cauchy(1.0, 1.0, 1),
            C.powered_exponential(1.0, 1.0, 2),
        ],
    )
    def test_tail_plus_box_equals_total(self, model):
        a = 2.0
        tail = C.tail_l1(model, a).value
        if model.d == 1:
            box, _ = quad(lambda t: C.rho_radial(model, t), 0.0, a)
            box *= 2.0
        else:
            box, _ = quad(
                lambda x: quad(
                    lambda y: C.rho_radial(model, math.hypot(x, y)), 0.0, a
                )[0],
                0.0,
                a,
            )
            box *= 4.0
        assert tail + box == pytest.approx(C.l1_norm(model), abs=1e-8)

    def test_invalid_box(self, exp_model):
        with pytest.raises(ValueError):
            C.tail_l1(exp_model, 0.0)


class TestLocalExponent:
    def test_powered_exponential_values(self):
        le = C.local_exponent(C.powered_exponential(1.5, 1.0, 1))
        assert (le.alpha, le.coefficient) == (1.5, 1.0)
        le = C.local_exponent(C.powered_exponential(2.0, 2.0, 1))
        assert le.alpha == 2.0
        assert le.coefficient == pytest.approx(0.25, rel=1e-15)

    def test_cauchy_value(self):
        le = C.local_exponent(C.cauchy(1.0, 1.0, 1))
        assert le.alpha == 2.0
        assert le.coefficient == pytest.approx(1.0, rel=1e-15)

    def test_regression_guard_is_exercised(self, monkeypatch):
        model = C.powered_exponential(1.0, 1.0, 1)
        monkeypatch.setattr(
            C, "one_minus_rho_radial", lambda m, r: np.asarray(r, dtype=float) ** 1.2
        )
        with pytest.raises(FitMismatchError):
            C.local_exponent(model)
