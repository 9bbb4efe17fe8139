"""Sojourn-time variance theory: exact integrals and high-level asymptotics.

For a stationary unit-variance Gaussian field with covariance rho and level
u, the indicator covariance at correlation y has density representation

    Cov(1{X>=u}, 1{Y>=u}) = int_0^rho phi2(u, y) dy,
    phi2(u, y) = exp(-u^2/(1+y)) / (2 pi sqrt(1-y^2)),

and the window variance of the sojourn time S_T over [0, T]^d is the
triangle-weighted lag integral of that covariance.  This module computes:

* the limiting per-volume variance sigma^2 (chaos series, cross-validated
  against the lag integral of the indicator covariance);
* the exact finite-T variance (tensorised quadrature);
* the high-level localisation diagnostics and the two-sided bounds whose
  common delta -> 0 limit pins the asymptotic variance density B(u) to

      B(u) = 2 phi(u) u^{-(1 + 2d/alpha)} *
             int_{R^d} tail_prob(sqrt(C |z|^alpha / 2)) dz,

  where (alpha, C) is the covariance's local exponent pair.  The constant
  integral is evaluated once per model and cached.

The 1/sqrt(1-y^2) endpoint singularity is removed exactly by y = sin(theta);
inner integrals use fixed Gauss-Legendre panels (the integrand is analytic),
outer lag integrals use adaptive quadrature.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import ndtr

from .covariance import (
    CovarianceModel,
    l1_norm,
    local_exponent,
    one_minus_rho_radial,
    rho_power_integral,
    rho_power_tail_exponent,
    rho_radial,
)
from .errors import CrossValidationError
from .hermite import chaos_series

_SQRT_2PI = math.sqrt(2.0 * math.pi)

_GL_NODES, _GL_WEIGHTS = leggauss(128)


def tail_prob(u) -> float:
    """Upper tail of the standard normal distribution."""
    return ndtr(-np.asarray(u, dtype=float)) if np.ndim(u) else float(ndtr(-u))


def normal_density(u: float) -> float:
    return math.exp(-0.5 * u * u) / _SQRT_2PI


def bivariate_density(u: float, y: float) -> float:
    """Equal-coordinate density phi2(u, y) of the correlated Gaussian pair."""
    if not -1.0 < y < 1.0:
        raise ValueError(f"correlation must lie in (-1, 1), got {y}")
    return math.exp(-u * u / (1.0 + y)) / (2.0 * math.pi * math.sqrt(1.0 - y * y))


def covariance_of_indicators(u: float, rho: float) -> float:
    """Cov(1{X>=u}, 1{Y>=u}) for unit Gaussians at correlation rho.

    Computed as int_0^rho phi2(u, y) dy with y = sin(theta), which removes
    the endpoint singularity at rho = +-1 exactly; equals arcsin(rho)/(2 pi)
    at u = 0.
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    b = math.asin(rho)
    theta = 0.5 * b * (_GL_NODES + 1.0)
    weights = 0.5 * b * _GL_WEIGHTS
    return float(np.dot(weights, np.exp(-u * u / (1.0 + np.sin(theta)))) / (2.0 * math.pi))


def _covariance_of_indicators_radial(model: CovarianceModel, u: float, r: float) -> float:
    return covariance_of_indicators(u, rho_radial(model, r))


# ---------------------------------------------------------------------------
# sigma^2: chaos series vs lag integral
# ---------------------------------------------------------------------------


def sigma_squared(model: CovarianceModel, u: float, tol: float = 1e-8) -> float:
    """Limiting variance per unit volume: sum_n n! c_n(u)^2 int rho^n.

    The series route (adaptively truncated and extrapolated) is
    cross-validated against int_{R^d} Cov(1{X>=u}, 1{X_t>=u}) dt to within
    10 * tol; disagreement raises :class:`CrossValidationError`.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    series = _sigma_squared_series(model, u, tol)
    integral = _sigma_squared_integral(model, u, tol)
    scale = max(abs(series), abs(integral), 1e-12)
    if abs(series - integral) > 10.0 * tol * max(1.0, scale):
        raise CrossValidationError(
            f"sigma^2 routes disagree: series={series!r}, integral={integral!r} "
            f"(u={u}, model={model})"
        )
    return series


def _sigma_squared_series(model: CovarianceModel, u: float, tol: float) -> float:
    gamma = rho_power_tail_exponent(model)
    return chaos_series(
        u,
        1.0,
        tol=tol,
        weight=lambda n: rho_power_integral(model, n),
        tail_exponent=gamma,
    )


def _sigma_squared_integral(model: CovarianceModel, u: float, tol: float) -> float:
    f = lambda r: _covariance_of_indicators_radial(model, u, r)
    if model.d == 1:
        val, _ = quad(f, 0.0, math.inf, epsabs=0.1 * tol, epsrel=1e-10, limit=400)
        return 2.0 * val
    val, _ = quad(
        lambda r: f(r) * r, 0.0, math.inf, epsabs=0.1 * tol, epsrel=1e-10, limit=400
    )
    return 2.0 * math.pi * val


# ---------------------------------------------------------------------------
# exact finite-window variance
# ---------------------------------------------------------------------------


def var_sojourn_exact(model: CovarianceModel, big_t: float, u: float) -> float:
    """Var(S_T): lag integral of the indicator covariance with the
    per-axis triangle weight prod_j (T - |t_j|)."""
    if big_t <= 0.0:
        raise ValueError(f"window size must be > 0, got {big_t}")
    f = lambda r: _covariance_of_indicators_radial(model, u, r)
    if model.d == 1:
        val, _ = quad(
            lambda t: (big_t - t) * f(t),
            0.0, big_t, epsabs=0.0, epsrel=1e-9, limit=500,
        )
        return 2.0 * val

    def inner(x: float) -> float:
        val, _ = quad(
            lambda y: (big_t - y) * f(math.hypot(x, y)),
            0.0, big_t, epsabs=0.0, epsrel=1e-8, limit=200,
        )
        return val

    val, _ = quad(
        lambda x: (big_t - x) * inner(x),
        0.0, big_t, epsabs=0.0, epsrel=1e-7, limit=200,
    )
    return 4.0 * val


# ---------------------------------------------------------------------------
# localisation diagnostics
# ---------------------------------------------------------------------------


def find_localization_box(model: CovarianceModel, delta: float = 0.5) -> float:
    """Largest eps with 1 - rho < delta everywhere on [-eps, eps]^d.

    The families are radial and decreasing, so only the box corner matters;
    eps is found by bisection.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    corner = math.sqrt(model.d)
    hi = model.scale
    while one_minus_rho_radial(model, hi * corner) < delta:
        hi *= 2.0
        if hi > 1e12 * model.scale:
            return hi
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if one_minus_rho_radial(model, mid * corner) < delta:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise ValueError(f"no box satisfies 1 - rho < {delta}")
    return lo


def localized_variance_density(model: CovarianceModel, u: float, eps: float) -> float:
    """Variance density over the local box: int_{[-eps,eps]^d} Cov_ind(u, rho(t)) dt."""
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    f = lambda r: _covariance_of_indicators_radial(model, u, r)
    if model.d == 1:
        val, _ = quad(f, 0.0, eps, epsabs=0.0, epsrel=1e-10, limit=300)
        return 2.0 * val

    def inner(x: float) -> float:
        val, _ = quad(
            lambda y: f(math.hypot(x, y)), 0.0, eps,
            epsabs=0.0, epsrel=1e-9, limit=150,
        )
        return val

    val, _ = quad(lambda x: inner(x), 0.0, eps, epsabs=0.0, epsrel=1e-8, limit=150)
    return 4.0 * val


def berman_localization_ratio(
    model: CovarianceModel, u: float, big_t: float, eps: float
) -> float:
    """Weighted variance mass outside [-eps, eps]^d relative to the mass inside.

    Small ratios certify that the variance localises near lag 0; this needs
    u large (at u = 0 the ratio is O(1)).  Returns +inf if the denominator
    underflows.
    """
    if not 0.0 < eps < big_t:
        raise ValueError(f"need 0 < eps < T, got eps={eps}, T={big_t}")
    f = lambda r: _covariance_of_indicators_radial(model, u, r)
    if model.d == 1:
        num, _ = quad(
            lambda t: (big_t - t) * f(t), eps, big_t,
            epsabs=0.0, epsrel=1e-9, limit=400,
        )
        den, _ = quad(
            lambda t: (big_t - t) * f(t), 0.0, eps,
            epsabs=0.0, epsrel=1e-9, limit=400,
        )
    else:
        den = _weighted_box_integral_2d(model, u, big_t, 0.0, eps)
        num = _weighted_box_integral_2d(model, u, big_t, 0.0, big_t) - den
    if den <= 0.0 or not math.isfinite(den):
        return math.inf
    return num / den


def _weighted_box_integral_2d(
    model: CovarianceModel, u: float, big_t: float, lo: float, hi: float
) -> float:
    f = lambda r: _covariance_of_indicators_radial(model, u, r)

    def inner(x: float) -> float:
        val, _ = quad(
            lambda y: (big_t - y) * f(math.hypot(x, y)), lo, hi,
            epsabs=0.0, epsrel=1e-8, limit=150,
        )
        return val

    val, _ = quad(lambda x: (big_t - x) * inner(x), lo, hi,
                  epsabs=0.0, epsrel=1e-7, limit=150)
    return 4.0 * val


# ---------------------------------------------------------------------------
# high-level asymptotics
# ---------------------------------------------------------------------------

_BERMAN_CACHE: dict[tuple[float, float, int], float] = {}
_BERMAN_LOCK = threading.Lock()


def berman_constant(model: CovarianceModel) -> float:
    """The model constant 2 int_{R^d} tail_prob(sqrt(C |z|^alpha / 2)) dz.

    Computed once per (alpha, C, d) under a lock and cached.
    """
    le = local_exponent(model)
    key = (le.alpha, le.coefficient, model.d)
    with _BERMAN_LOCK:
        cached = _BERMAN_CACHE.get(key)
        if cached is not None:
            return cached
        alpha, c = le.alpha, le.coefficient
        g = lambda z: tail_prob(math.sqrt(c * z ** alpha / 2.0))
        if model.d == 1:
            val, _ = quad(g, 0.0, math.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
            const = 4.0 * val
        else:
            val, _ = quad(
                lambda z: g(z) * z, 0.0, math.inf,
                epsabs=1e-14, epsrel=1e-12, limit=400,
            )
            const = 4.0 * math.pi * val
        _BERMAN_CACHE[key] = const
        return const


def berman_b_asymptotic(model: CovarianceModel, u: float) -> float:
    """High-level variance density B(u) = const * phi(u) * u^{-(1 + 2d/alpha)}.

    This is the common delta -> 0 limit of the two-sided bounds below after
    the rescaling t = z / u^{2/alpha}.  The exponent uses the general-d form
    1 + 2d/alpha (equal to (2 + alpha)/alpha when d = 1).
    """
    if u <= 0.0:
        raise ValueError(f"level must be > 0, got {u}")
    le = local_exponent(model)
    exponent = 1.0 + 2.0 * model.d / le.alpha
    return berman_constant(model) * normal_density(u) * u ** (-exponent)


def berman_lower_bound_audit(
    model: CovarianceModel, u: float, theta: float
) -> float:
    """Localised variance density amplified by exp(u^2 theta / 2), theta > 1.

    The high-level lower bound predicts this stays bounded away from 0 as u
    grows; the factor eventually dominates, so the audit sequence rises.
    """
    if theta <= 1.0:
        raise ValueError(f"theta must be > 1, got {theta}")
    eps = find_localization_box(model, delta=0.5)
    return localized_variance_density(model, u, eps) * math.exp(u * u * theta / 2.0)


@dataclass(frozen=True)
class TwoSidedBounds:
    """Asymptotic sandwich for the localised variance density at level u."""

    u: float
    delta: float
    eps: float
    lower: float
    upper: float


def berman_two_sided_bounds(
    model: CovarianceModel, u: float, delta: float
) -> TwoSidedBounds:
    """Two-sided bounds for B(u) on the box where 1 - rho < delta:

        upper = 2 sqrt(2/(2-delta)) (phi(u)/u)
                int_box tail_prob(u sqrt((1-rho(t))/2)) dt
        lower = sqrt(2(2-delta)) (phi(u)/u)
                int_box tail_prob(u sqrt((1-rho(t))/(2-delta))) dt

    Both tighten to the same limit as delta -> 0.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if u <= 0.0:
        raise ValueError(f"level must be > 0, got {u}")
    eps = find_localization_box(model, delta)
    pref = normal_density(u) / u

    def tail_at(r: float, denom: float) -> float:
        return tail_prob(u * math.sqrt(one_minus_rho_radial(model, r) / denom))

    if model.d == 1:
        iu, _ = quad(lambda t: tail_at(t, 2.0), 0.0, eps,
                     epsabs=0.0, epsrel=1e-10, limit=300)
        il, _ = quad(lambda t: tail_at(t, 2.0 - delta), 0.0, eps,
                     epsabs=0.0, epsrel=1e-10, limit=300)
        iu *= 2.0
        il *= 2.0
    else:
        iu = _box_tail_integral_2d(model, u, eps, 2.0)
        il = _box_tail_integral_2d(model, u, eps, 2.0 - delta)
    upper = 2.0 * math.sqrt(2.0 / (2.0 - delta)) * pref * iu
    lower = math.sqrt(2.0 * (2.0 - delta)) * pref * il
    return TwoSidedBounds(u=u, delta=delta, eps=eps, lower=lower, upper=upper)


def _box_tail_integral_2d(
    model: CovarianceModel, u: float, eps: float, denom: float
) -> float:
    def inner(x: float) -> float:
        val, _ = quad(
            lambda y: tail_prob(
                u * math.sqrt(one_minus_rho_radial(model, math.hypot(x, y)) / denom)
            ),
            0.0, eps, epsabs=0.0, epsrel=1e-9, limit=150,
        )
        return val

    val, _ = quad(inner, 0.0, eps, epsabs=0.0, epsrel=1e-8, limit=150)
    return 4.0 * val


# ---------------------------------------------------------------------------
# combined report row
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceBreakdown:
    """Exact finite-T variance next to its large-T and high-level stand-ins."""

    T: float
    u: float
    exact: float
    series_sigma2: float
    asymptotic: float
    ratio: float


def variance_breakdown(
    model: CovarianceModel, big_t: float, u: float, tol: float = 1e-8
) -> VarianceBreakdown:
    exact = var_sojourn_exact(model, big_t, u)
    sigma2 = sigma_squared(model, u, tol)
    if u > 0.0:
        asym = big_t ** model.d * berman_b_asymptotic(model, u)
    else:
        asym = math.nan
    ratio = exact / asym if asym and math.isfinite(asym) and asym > 0.0 else math.nan
    return VarianceBreakdown(
        T=big_t, u=u, exact=exact, series_sigma2=sigma2, asymptotic=asym, ratio=ratio
    )
