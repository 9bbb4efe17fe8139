"""Probabilists' Hermite polynomials and the chaos expansion of level indicators.

The indicator 1{X >= u} of a standard Gaussian X expands over Hermite
polynomials with coefficients

    c_n(u) = phi(u) * He_{n-1}(u) / n!,        n >= 1,

where phi is the standard normal density.  Everything in this module is
built from two numerically stable primitives:

* ``hermite_scaled(n, x)`` evaluates e^{-x^2/4} He_n(x) / sqrt(n!), which
  stays O(1) for all n and x, via a normalised three-term recurrence.
* the squared-coefficient identity

      n! * c_n(u)^2 = e^{-u^2/2} * hermite_scaled(n-1, u)^2 / (2 pi n),

  which avoids every factorial and every large intermediate.

Series of the form sum_n n! c_n(u)^2 w_n with slowly varying weights decay
only like n^{-3/2} w_n, so partial sums alone cannot reach tight absolute
tolerances.  The summation engine therefore pairs adaptive truncation with
Richardson extrapolation in powers N^{-(p + k)}, p = 1/2 + (weight decay
exponent), validated against closed-form oracles in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ToleranceNotReachedError

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_RESCALE = 200.0 * math.log(10.0)


def hermite(n: int, x: float) -> float:
    """He_n(x) by the recurrence He_{n+1} = x He_n - n He_{n-1}.

    Overflows to +-inf for large n*x; use :func:`hermite_scaled` there.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    if n == 0:
        return 1.0
    hm1, h = 1.0, x
    for m in range(1, n):
        hm1, h = h, x * h - m * hm1
    return h


def hermite_scaled(n: int, x: float) -> float:
    """e^{-x^2/4} He_n(x) / sqrt(n!), finite for all n and x.

    The recurrence runs on h_m = He_m(x)/sqrt(m!) with periodic rescaling,
    and the e^{-x^2/4} damping is applied once in log domain at the end,
    so neither factorials nor the Gaussian factor ever over/underflow.
    """
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    if n == 0:
        return math.exp(-x * x / 4.0)
    log_scale = -x * x / 4.0
    hm1, h = 1.0, x
    for m in range(1, n):
        hm1, h = h, (x * h - math.sqrt(m) * hm1) / math.sqrt(m + 1.0)
        a = abs(h)
        if a > 1e200:
            h *= 1e-200
            hm1 *= 1e-200
            log_scale += _LOG_RESCALE
        elif 0.0 < a < 1e-200:
            h *= 1e200
            hm1 *= 1e200
            log_scale -= _LOG_RESCALE
    if h == 0.0:
        return 0.0
    return math.copysign(math.exp(log_scale + math.log(abs(h))), h)


@dataclass(frozen=True)
class ChaosCoefficient:
    """One weight of the indicator's chaos expansion: c_n(u) = phi(u) He_{n-1}(u)/n!."""

    n: int
    u: float
    value: float


_DIRECT_ORDER_MAX = 30  # n! and He_{n-1}(u) stay comfortably inside double range


def chaos_coefficient(n: int, u: float) -> ChaosCoefficient:
    """c_n(u) = phi(u) He_{n-1}(u) / n!; log-domain evaluation for n > 30."""
    if n < 1:
        raise ValueError(f"chaos order must be >= 1, got {n}")
    if n <= _DIRECT_ORDER_MAX:
        value = _phi(u) * hermite(n - 1, u) / math.factorial(n)
    else:
        hs = hermite_scaled(n - 1, u)
        if hs == 0.0:
            value = 0.0
        else:
            # c_n = hs * e^{u^2/4} sqrt((n-1)!) * phi(u) / n!
            log_mag = (
                -u * u / 4.0
                - 0.5 * math.log(2.0 * math.pi)
                + math.log(abs(hs))
                + 0.5 * float(gammaln(n))
                - float(gammaln(n + 1))
            )
            value = math.copysign(math.exp(log_mag), hs)
    return ChaosCoefficient(n=n, u=u, value=value)


def squared_coefficient_term(n: int, u: float) -> float:
    """n! * c_n(u)^2, evaluated without factorials (always finite)."""
    if n < 1:
        raise ValueError(f"chaos order must be >= 1, got {n}")
    hs = hermite_scaled(n - 1, u)
    return math.exp(-u * u / 2.0) * hs * hs / (2.0 * math.pi * n)


def mehler_covariance(n: int, rho: float) -> float:
    """E[He_n(X) He_n(Y)] = n! rho^n for unit Gaussians with correlation rho."""
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    log_mag = float(gammaln(n + 1)) + n * math.log(abs(rho))
    sign = -1.0 if (rho < 0.0 and n % 2 == 1) else 1.0
    try:
        return sign * math.exp(log_mag)
    except OverflowError:
        return sign * math.inf


# ---------------------------------------------------------------------------
# series engine
# ---------------------------------------------------------------------------

DEFAULT_MAX_ORDER = 1 << 21


class _TermStream:
    """Running generator of terms t_n = n! c_n(u)^2 * w(n), resumable."""

    def __init__(self, u: float, weight: Callable[[int], float] | None):
        self._u = u
        self._w = weight
        self._pref = math.exp(-u * u / 2.0) / (2.0 * math.pi)
        self._hm1 = 0.0
        self._h = math.exp(-u * u / 4.0)  # hermite_scaled(0, u)
        self._n = 1

    def term(self) -> float:
        w = 1.0 if self._w is None else self._w(self._n)
        return self._pref * self._h * self._h * w / self._n

    def advance(self) -> None:
        m = self._n - 1
        self._hm1, self._h = (
            self._h,
            (self._u * self._h - math.sqrt(m) * self._hm1) / math.sqrt(m + 1.0),
        )
        self._n += 1

    @property
    def n(self) -> int:
        return self._n


def _extrapolated_sum(
    u: float,
    weight: Callable[[int], float] | None,
    tail_exponent: float,
    tol: float,
    max_order: int,
) -> float:
    """sum_{n>=1} n! c_n(u)^2 w(n) with w(n) ~ n^{-tail_exponent}.

    Pair-averaged partial sums at orders N, 2N, 4N, ... feed a Richardson
    table whose leading error exponent is p = 1/2 + tail_exponent; the run
    doubles the window until the last two table diagonals agree within tol.
    """
    p = 0.5 + tail_exponent
    stream = _TermStream(u, weight)
    total = stream.term()
    checkpoints: list[float] = []
    diag_prev: float | None = None
    n_checkpoint = max(256, 8 * int(u * u) + 8)
    while True:
        while stream.n < n_checkpoint:
            stream.advance()
            total += stream.term()
        # pair-average: Q_N = P_N + a_{N+1}/2 damps the alternating tail part
        stream.advance()
        a_next = stream.term()
        total += a_next
        checkpoints.append(total - 0.5 * a_next)
        if len(checkpoints) >= 3:
            col = np.asarray(checkpoints)
            for k in range(len(checkpoints) - 1):
                f = 2.0 ** (p + k)
                col = (f * col[1:] - col[:-1]) / (f - 1.0)
            diag = float(col[-1])
            if diag_prev is not None and abs(diag - diag_prev) <= 0.5 * tol:
                return diag
            diag_prev = diag
        n_checkpoint *= 2
        if n_checkpoint > max_order:
            raise ToleranceNotReachedError(
                f"series for u={u} did not reach tol={tol} within order {max_order}"
            )


def _truncated_sum(
    u: float,
    rho: float,
    tol: float,
    weight: Callable[[int], float] | None,
    max_order: int,
) -> float:
    """Plain adaptive truncation, valid for |rho| < 1 (geometric tail).

    Stopping uses the measured-envelope majorant n! c_n(u)^2 <= c_maj n^{-3/2}
    (Stirling plus the scanned envelope constant), with the weight assumed
    nonincreasing, so the certified tail is
    c_maj (n+1)^{-3/2} w(n+1) |rho|^{n+1} / (1 - |rho|).
    """
    a = abs(rho)
    c_maj = _tail_majorant_constant(u, en1_constant(u))
    stream = _TermStream(u, weight)
    total = stream.term() * rho
    power = rho
    while True:
        n_next = stream.n + 1
        w_next = 1.0 if weight is None else weight(n_next)
        tail_bound = c_maj * n_next ** (-1.5) * w_next * a ** n_next / (1.0 - a)
        if tail_bound < 0.5 * tol:
            return total
        if stream.n >= max_order:
            raise ToleranceNotReachedError(
                f"series for u={u}, rho={rho} did not reach tol={tol} "
                f"within order {max_order}"
            )
        stream.advance()
        power *= rho
        total += stream.term() * power


def chaos_series(
    u: float,
    rho: float,
    tol: float = 1e-10,
    weight: Callable[[int], float] | None = None,
    tail_exponent: float = 0.0,
    max_order: int = DEFAULT_MAX_ORDER,
) -> float:
    """sum_{n>=1} n! c_n(u)^2 rho^n w(n), the chaos form of Cov(1{X>=u}, 1{Y>=u}).

    For |rho| < 1 the tail is geometric and plain truncation is used; at
    rho = 1 the extrapolated engine takes over.  ``tail_exponent`` is the
    polynomial decay rate of ``weight`` (0 for none), which fixes the
    extrapolation exponents.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return _extrapolated_sum(u, weight, tail_exponent, tol, max_order)
    if rho == -1.0:
        # alternating counterpart: fold the sign into the weight
        base = weight

        def signed(n: int, _w=base) -> float:
            w = 1.0 if _w is None else _w(n)
            return -w if n % 2 else w

        return _extrapolated_sum(u, signed, tail_exponent, tol, max_order)
    return _truncated_sum(u, rho, tol, weight, max_order)


def indicator_variance_series(
    u: float, tol: float, max_order: int = DEFAULT_MAX_ORDER
) -> float:
    """Var(1{X >= u}) summed through the chaos expansion: sum_n n! c_n(u)^2.

    Equals tail_prob(u) * (1 - tail_prob(u)); the test suite checks this
    against a complementary-error-function oracle.  Raises
    :class:`ToleranceNotReachedError` if ``tol`` is unreachable within
    ``max_order`` terms.
    """
    return chaos_series(u, 1.0, tol=tol, max_order=max_order)


def _tail_majorant_constant(u: float, c_u: float) -> float:
    """c_maj such that n! c_n(u)^2 <= c_maj * n^{-3/2} for every n >= 1.

    Combines e^{-u^2/4}|He_{n-1}(u)| <= c_u ((n-1)/e)^{(n-1)/2} with the
    Stirling lower bound n! >= sqrt(2 pi n)(n/e)^n.
    """
    return c_u * c_u * math.exp(-u * u / 2.0) * math.e / (2.0 * math.pi * _SQRT_2PI)


def chaos_tail_majorant(u: float, c_u: float, n_trunc: int) -> float:
    """Upper bound for sum_{n > N} n! c_n(u)^2 from the envelope constant c_u."""
    if n_trunc < 1:
        raise ValueError("truncation order must be >= 1")
    return 2.0 * _tail_majorant_constant(u, c_u) / math.sqrt(n_trunc)


_EN1_CACHE: dict[float, float] = {}


def en1_constant(u: float, n_scan: int = 400) -> float:
    """Measured envelope constant: max_{n <= n_scan} e^{-u^2/4}|He_n(u)| (n/e)^{-n/2}.

    The scanned maximum is attained at small n for fixed u (the ratio decays
    like n^{-1/12} afterwards), so a short scan suffices.
    """
    cached = _EN1_CACHE.get(u)
    if cached is not None:
        return cached
    damp = math.exp(-u * u / 4.0)
    hm1, h = 0.0, 1.0
    best = damp  # n = 0 with the convention (0/e)^0 = 1
    for m in range(0, n_scan):
        hm1, h = h, (u * h - math.sqrt(m) * hm1) / math.sqrt(m + 1.0)
        n = m + 1
        scaled = damp * abs(h)
        if scaled > 0.0:
            log_corr = 0.5 * float(gammaln(n + 1)) - 0.5 * n * (math.log(n) - 1.0)
            best = max(best, scaled * math.exp(log_corr))
    if len(_EN1_CACHE) < 4096:
        _EN1_CACHE[u] = best
    return best


# ---------------------------------------------------------------------------
# exact-arithmetic certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InequalityCertificate:
    """Exact check of the normalised contraction sum against 9^{p-1}."""

    p: int
    lhs: int
    rhs: int
    holds: bool


def chaos_variance_inequality(p: int) -> InequalityCertificate:
    """Certify sum_{r=0}^{p-2} C(p-1,r)^2 C(2p-2-2r, p-1-r) <= 9^{p-1} exactly."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    lhs = sum(
        math.comb(p - 1, r) ** 2 * math.comb(2 * p - 2 - 2 * r, p - 1 - r)
        for r in range(p - 1)
    )
    rhs = 9 ** (p - 1)
    return InequalityCertificate(p=p, lhs=lhs, rhs=rhs, holds=lhs <= rhs)


@dataclass(frozen=True)
class LogSafeBound:
    """A nonnegative bound carried with its exact log; value is +inf on overflow."""

    value: float
    log_value: float


def malliavin_derivative_variance_bound(
    n: int, big_t: float, d: int, rho_l1: float
) -> LogSafeBound:
    """Variance bound for |D F_n|^2 of the normalised Hermite functional:

        (n^4 / T^d) sum_{r=0}^{n-2} (r!)^2 C(n-1,r)^4 (2n-2-2r)! * rho_l1^3.

    The combinatorial sum is exact (big integers); the scale factors are
    applied in log domain so overflow degrades to an inf value with the
    exact log still reported.
    """
    if n < 2:
        raise ValueError(f"chaos order must be >= 2, got {n}")
    if big_t <= 0.0 or d < 1 or rho_l1 <= 0.0:
        raise ValueError("T, d and rho_l1 must be positive")
    comb_sum = sum(
        math.factorial(r) ** 2
        * math.comb(n - 1, r) ** 4
        * math.factorial(2 * n - 2 - 2 * r)
        for r in range(n - 1)
    )
    log_value = (
        4.0 * math.log(n)
        - d * math.log(big_t)
        + _log_int(comb_sum)
        + 3.0 * math.log(rho_l1)
    )
    try:
        value = math.exp(log_value)
    except OverflowError:
        value = math.inf
    return LogSafeBound(value=value, log_value=log_value)


def _log_int(k: int) -> float:
    """log of a positive integer of arbitrary size."""
    if k <= 0:
        raise ValueError("expected a positive integer")
    if k.bit_length() <= 900:
        return math.log(k)
    shift = k.bit_length() - 900
    return math.log(k >> shift) + shift * math.log(2.0)


# ---------------------------------------------------------------------------
# numerical audit of the classical envelope bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HermiteBoundScan:
    """Measured envelope constants for the Hermite bounds used by the rate bounds.

    K_hat           max of phi(u)|He_n(u)|/sqrt(n!) over the scan.
    en1_constants   per-level max of e^{-u^2/4}|He_n(u)| (n/e)^{-n/2}.
    en3_ratio_trace (n, ratio) samples of
                    max_x e^{-x^2/4}|He_n(x)| / (sqrt(n!) n^{-1/12}).
    """

    K_hat: float
    en1_constants: dict[float, float]
    en3_ratio_trace: list[tuple[int, float]]


def hermite_bound_scan(u_grid: Sequence[float], n_max: int) -> HermiteBoundScan:
    """Scan the normalised Hermite envelopes up to order ``n_max``.

    Only measured values are reported; nothing is asserted beyond the
    scanned range.
    """
    if n_max < 100:
        raise ValueError(f"n_max must be >= 100, got {n_max}")
    u = np.unique(np.asarray(list(u_grid), dtype=float))
    if u.size == 0:
        raise ValueError("u_grid must be non-empty")

    damp = np.exp(-u * u / 4.0)
    # h_m = He_m(u)/sqrt(m!); bounded by e^{u^2/4} * O(1), safe for |u| <~ 52
    hm1 = np.zeros_like(u)
    h = np.ones_like(u)
    k_best = damp * np.abs(h) / _SQRT_2PI
    en1_best = damp * np.abs(h)  # n = 0 convention: (0/e)^0 = 1
    for m in range(0, n_max):
        if m == 0:
            hm1, h = h, u * h
        else:
            hm1, h = h, (u * h - math.sqrt(m) * hm1) / math.sqrt(m + 1.0)
        n = m + 1
        scaled = damp * np.abs(h)  # e^{-u^2/4}|He_n(u)|/sqrt(n!)
        np.maximum(k_best, scaled / _SQRT_2PI, out=k_best)
        # e^{-u^2/4}|He_n| (n/e)^{-n/2} = scaled * sqrt(n!) (n/e)^{-n/2}
        log_corr = 0.5 * float(gammaln(n + 1)) - 0.5 * n * (math.log(n) - 1.0)
        with np.errstate(divide="ignore"):
            cand = np.where(scaled > 0.0, scaled * math.exp(log_corr), 0.0)
        np.maximum(en1_best, cand, out=en1_best)

    schedule = _geometric_schedule(n_max)
    trace = [(n, _en3_ratio(n)) for n in schedule]
    return HermiteBoundScan(
        K_hat=float(k_best.max()),
        en1_constants={float(ui): float(ci) for ui, ci in zip(u, en1_best)},
        en3_ratio_trace=trace,
    )


def _geometric_schedule(n_max: int) -> list[int]:
    """Orders n_max, n_max/2, n_max/4, ... down to ~100, ascending."""
    out = []
    n = n_max
    while n >= 100:
        out.append(n)
        n //= 2
    return sorted(out)


def _en3_ratio(n: int, grid_size: int = 1200) -> float:
    """max_x e^{-x^2/4}|He_n(x)| / (sqrt(n!) n^{-1/12}).

    Grid scan over [0, 2.2 sqrt(n) + 5] (parity makes x >= 0 enough),
    followed by golden-section refinement of the winning bracket.
    """
    x_hi = 2.2 * math.sqrt(n) + 5.0
    xs = np.linspace(0.0, x_hi, grid_size)
    vals = _hermite_scaled_vec(n, xs)
    i = int(np.argmax(np.abs(vals)))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, grid_size - 1)]
    x_star = _golden_max(lambda x: abs(hermite_scaled(n, x)), lo, hi)
    return abs(hermite_scaled(n, x_star)) * n ** (1.0 / 12.0)


def _hermite_scaled_vec(n: int, xs: np.ndarray) -> np.ndarray:
    """hermite_scaled over a vector of points, with per-column rescaling."""
    h = np.ones_like(xs)
    hm1 = np.zeros_like(xs)
    log_scale = -xs * xs / 4.0
    for m in range(0, n):
        if m == 0:
            hm1, h = h, xs * h
        else:
            hm1, h = h, (xs * h - math.sqrt(m) * hm1) / math.sqrt(m + 1.0)
        a = np.abs(h)
        big = a > 1e200
        if big.any():
            h[big] *= 1e-200
            hm1[big] *= 1e-200
            log_scale[big] += _LOG_RESCALE
        small = (a > 0.0) & (a < 1e-200)
        if small.any():
            h[small] *= 1e200
            hm1[small] *= 1e200
            log_scale[small] -= _LOG_RESCALE
    with np.errstate(divide="ignore"):
        out = np.where(h != 0.0, np.sign(h) * np.exp(log_scale + np.log(np.abs(h))), 0.0)
    return out


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f: Callable[[float], float], lo: float, hi: float, iters: int = 60) -> float:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI
