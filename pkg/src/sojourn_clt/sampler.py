"""Exact simulation of stationary Gaussian fields by circulant embedding.

The covariance matrix of a stationary field on a regular grid is (block)
Toeplitz; wrapping it onto a torus of twice the size makes it (block)
circulant, which the FFT diagonalises.  When the embedding eigenvalues are
nonnegative, filtering complex white noise through their square root gives
samples whose covariance at every pair of grid lags equals rho exactly (up
to floating round-off) -- no truncation, no mixing-in of approximation error.

Indefinite embeddings are handled by doubling the torus (padding) up to
three times and then failing loudly: eigenvalue clamping would silently
bias the covariance, which would corrupt every variance comparison built
on top of the sampler.

Randomness is counter-based: replicate r of a run keyed by ``master_seed``
draws from Philox with key (master_seed, r), so any scheduling of the
replicates produces identical fields.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.fft import next_fast_len

from .covariance import CovarianceModel, one_minus_rho_radial, rho_radial
from .errors import GridMismatchError, NotPositiveSemidefiniteError

MAX_GRID_POINTS = 1 << 26  # memory cap on n_points_per_axis ** d
_PSD_REL_TOL = 1e-10
_MAX_PADDING_DOUBLINGS = 3


@dataclass(frozen=True)
class GridSpec:
    """Regular grid over [0, T]^d with spacing h.

    The grid carries round(T/h) + 1 points per axis; volume conventions
    (sojourn sums, full-box volume) use the cell extent h * (n - 1).
    """

    d: int
    T: float
    h: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.d}")
        if self.T <= 0.0 or self.h <= 0.0:
            raise ValueError("T and h must be > 0")
        if self.h > self.T:
            raise ValueError(f"spacing {self.h} exceeds the window {self.T}")
        if self.n_points_per_axis ** self.d > MAX_GRID_POINTS:
            raise ValueError(
                f"grid of {self.n_points_per_axis}^{self.d} points exceeds the "
                f"configured cap of {MAX_GRID_POINTS}"
            )

    @property
    def n_points_per_axis(self) -> int:
        return round(self.T / self.h) + 1

    @property
    def extent(self) -> float:
        """Edge length actually spanned by the grid: h * (n - 1)."""
        return self.h * (self.n_points_per_axis - 1)


def default_spacing(model: CovarianceModel, roughness_budget: float = 0.01) -> float:
    """Spacing h with 1 - rho(h) <= roughness_budget, so the grid resolves
    the local-exponent region of the covariance."""
    if not 0.0 < roughness_budget < 1.0:
        raise ValueError("roughness budget must lie in (0, 1)")
    lo, hi = 0.0, model.scale
    while one_minus_rho_radial(model, hi) < roughness_budget:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if one_minus_rho_radial(model, mid) <= roughness_budget:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True, eq=False)
class CirculantSpectrum:
    """Eigenvalues of the (block) circulant embedding on the doubled torus."""

    eigenvalues: np.ndarray
    min_eig: float
    embedding_size: int  # torus points per axis
    padding_factor: int


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One exact realization of the field on its grid (values are read-only)."""

    grid: GridSpec
    values: np.ndarray
    seed: int
    replicate_index: int


_spectrum_cache: dict[tuple, CirculantSpectrum] = {}
_spectrum_lock = threading.Lock()


def _embedding_eigenvalues(model: CovarianceModel, grid: GridSpec, pad: int) -> tuple[np.ndarray, int]:
    n = grid.n_points_per_axis
    # any torus >= the minimal 2(n-1) embedding reproduces rho exactly at all
    # grid lags, so round up to an FFT-friendly length
    m = next_fast_len(2 * (n - 1) * pad)
    lags = np.minimum(np.arange(m), m - np.arange(m)) * grid.h
    if grid.d == 1:
        row = rho_radial(model, lags)
        lam = np.fft.fft(row).real
    else:
        lx, ly = np.meshgrid(lags, lags, indexing="ij")
        row = rho_radial(model, np.hypot(lx, ly))
        lam = np.fft.fft2(row).real
    return lam, m


def circulant_spectrum(model: CovarianceModel, grid: GridSpec) -> CirculantSpectrum:
    """Embedding eigenvalues, escalating the torus size until they are
    nonnegative (within floating tolerance) or the padding budget runs out."""
    if model.d != grid.d:
        raise GridMismatchError(
            f"model dimension {model.d} != grid dimension {grid.d}"
        )
    key = (model, grid)
    with _spectrum_lock:
        cached = _spectrum_cache.get(key)
    if cached is not None:
        return cached

    pad = 1
    for attempt in range(_MAX_PADDING_DOUBLINGS + 1):
        lam, m = _embedding_eigenvalues(model, grid, pad)
        min_eig = float(lam.min())
        if min_eig >= -_PSD_REL_TOL * float(lam.max()):
            spec = CirculantSpectrum(
                eigenvalues=lam, min_eig=min_eig, embedding_size=m, padding_factor=pad
            )
            spec.eigenvalues.flags.writeable = False
            with _spectrum_lock:
                _spectrum_cache.setdefault(key, spec)
            return spec
        pad *= 2
    raise NotPositiveSemidefiniteError(
        f"embedding stayed indefinite (min eigenvalue {min_eig:.3e}) after "
        f"{_MAX_PADDING_DOUBLINGS} padding doublings for {model} on {grid}"
    )


def _replicate_rng(master_seed: int, replicate_index: int) -> np.random.Generator:
    if not 0 <= master_seed < 2 ** 64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    if replicate_index < 0:
        raise ValueError("replicate_index must be >= 0")
    key = np.array([master_seed, replicate_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_field(
    model: CovarianceModel,
    grid: GridSpec,
    master_seed: int,
    replicate_index: int,
) -> FieldSample:
    """One exact stationary sample, a pure function of (master_seed, replicate_index)."""
    spec = circulant_spectrum(model, grid)
    lam = np.maximum(spec.eigenvalues, 0.0)  # kill round-off negatives within tol
    m = spec.embedding_size
    rng = _replicate_rng(master_seed, replicate_index)
    n = grid.n_points_per_axis
    if grid.d == 1:
        noise = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        z = np.fft.fft(noise * np.sqrt(lam / m))
        values = np.ascontiguousarray(z.real[:n])
    else:
        noise = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        z = np.fft.fft2(noise * np.sqrt(lam / (m * m)))
        values = np.ascontiguousarray(z.real[:n, :n])
    values.flags.writeable = False
    return FieldSample(
        grid=grid, values=values, seed=master_seed, replicate_index=replicate_index
    )


@dataclass(frozen=True)
class CovarianceEstimate:
    estimate: float
    stderr: float


def empirical_covariance(samples: list[FieldSample], lag) -> CovarianceEstimate:
    """Cross-replicate estimate of E[X(t) X(t + lag)] with its standard error.

    The lag is given in physical units and must land on the grid; each
    replicate contributes its spatial average of the products, and the
    standard error comes from the spread of those replicate averages.
    """
    if len(samples) < 2:
        raise ValueError("need at least two replicates")
    grid = samples[0].grid
    if any(s.grid != grid for s in samples[1:]):
        raise GridMismatchError("samples live on different grids")
    offsets = _lag_to_offsets(grid, lag)
    n = grid.n_points_per_axis
    per_replicate = []
    for s in samples:
        if grid.d == 1:
            (k,) = offsets
            a = s.values[: n - k]
            b = s.values[k:]
        else:
            kx, ky = offsets
            a = s.values[: n - kx, : n - ky]
            b = s.values[kx:, ky:]
        per_replicate.append(float(np.mean(a * b)))
    arr = np.asarray(per_replicate)
    return CovarianceEstimate(
        estimate=float(arr.mean()),
        stderr=float(arr.std(ddof=1) / math.sqrt(len(arr))),
    )


def _lag_to_offsets(grid: GridSpec, lag) -> tuple[int, ...]:
    comps = np.atleast_1d(np.asarray(lag, dtype=float))
    if comps.size != grid.d:
        raise GridMismatchError(
            f"lag has {comps.size} components, grid has d={grid.d}"
        )
    offsets = []
    for c in comps:
        k = c / grid.h
        k_round = round(k)
        if abs(k - k_round) > 1e-9:
            raise GridMismatchError(f"lag component {c} is not a grid multiple of h={grid.h}")
        k_abs = abs(k_round)  # estimate(lag) == estimate(-lag): same pairs
        if k_abs >= grid.n_points_per_axis:
            raise GridMismatchError(f"lag component {c} exceeds the grid extent")
        offsets.append(k_abs)
    return tuple(offsets)
