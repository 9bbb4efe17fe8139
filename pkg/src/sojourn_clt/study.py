"""Monte Carlo convergence studies for normalised sojourn times.

A study simulates R exact field replicates per window size T, reduces each
to its sojourn time above the level, normalises with the mode's theoretical
centering and scale, and measures the Wasserstein-1 distance between the
empirical law and the Gaussian limit.  Reports attach the corresponding
theoretical rate bounds but never conflate the two: the empirical W1
carries Monte Carlo and grid-discretisation error the continuum bounds do
not model.

Replicates are embarrassingly parallel and deterministically seeded, so a
report is a pure function of its configuration: any worker count yields
bit-identical rows.
"""

from __future__ import annotations

import csv
import io
import math
import os
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields as dataclass_fields
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri

from .bounds import (
    FIXED,
    MOVING,
    corollary_condition,
    fixed_level_bound,
    moving_level_bound,
)
from .covariance import CovarianceModel, local_exponent, model_from_dict, model_to_dict
from .errors import SojournError
from .sampler import FieldSample, GridSpec, default_spacing, sample_field
from .variance import (
    berman_b_asymptotic,
    sigma_squared,
    tail_prob,
    var_sojourn_exact,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)

WORKERS_ENV = "SOJOURN_WORKERS"


# ---------------------------------------------------------------------------
# per-replicate reductions
# ---------------------------------------------------------------------------


def sojourn_time(sample: FieldSample, u: float) -> float:
    """Riemann sojourn volume: h^d times the count of exceedances over the
    left-endpoint cell corners (the last point per axis is excluded, so the
    full-exceedance volume is exactly extent^d with extent = h (n - 1))."""
    grid = sample.grid
    if grid.d == 1:
        count = int(np.count_nonzero(sample.values[:-1] >= u))
    else:
        count = int(np.count_nonzero(sample.values[:-1, :-1] >= u))
    return grid.h ** grid.d * count


@dataclass(frozen=True)
class TheoryContext:
    """Theoretical centering/scale inputs for :func:`normalize`."""

    tail_probability: float
    d: int
    variance: float | None = None  # exact Var(S_T); required in moving mode


@dataclass(frozen=True)
class SojournStatistic:
    T: float
    u: float
    raw: float
    centered_normalized: float


def normalize(
    stat_raw: float, big_t: float, u: float, mode: str, theory_ctx: TheoryContext
) -> SojournStatistic:
    """Center and scale one sojourn time.

    fixed:  (S - T^d q) / sqrt(T^d), q = tail_probability;
    moving: (S - T^d q) / sqrt(Var(S_T)) with the exact finite-T variance.
    """
    volume = big_t ** theory_ctx.d
    centered = stat_raw - volume * theory_ctx.tail_probability
    if mode == FIXED:
        scale = math.sqrt(volume)
    elif mode == MOVING:
        if theory_ctx.variance is None:
            raise ValueError("moving mode needs the exact variance in the context")
        if theory_ctx.variance < 1e-300:
            raise ZeroDivisionError(
                f"sojourn variance {theory_ctx.variance} too small to normalise"
            )
        scale = math.sqrt(theory_ctx.variance)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return SojournStatistic(
        T=big_t, u=u, raw=stat_raw, centered_normalized=centered / scale
    )


# ---------------------------------------------------------------------------
# Wasserstein-1 distance to a centered Gaussian
# ---------------------------------------------------------------------------


def wasserstein1_to_gaussian(samples, sigma: float) -> float:
    """Exact W1 between the empirical law of ``samples`` and N(0, sigma^2).

    On the line W1 is the L1 distance between CDFs; with sorted samples the
    integral is a finite sum of closed-form pieces built from the
    antiderivative int Phi = x Phi(x) + phi(x).  No quadrature, no second
    sample.
    """
    x = np.sort(np.asarray(list(samples), dtype=float))
    if x.size < 2:
        raise ValueError("need at least two samples")
    if not np.isfinite(x).all():
        raise ValueError("samples must be finite")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")

    def gauss_cdf_antideriv(pts: np.ndarray) -> np.ndarray:
        z = pts / sigma
        return sigma * (z * ndtr(z) + np.exp(-0.5 * z * z) / _SQRT_2PI)

    n = x.size
    big_g = gauss_cdf_antideriv(x)
    z_last = x[-1] / sigma
    total = big_g[0]  # int_{-inf}^{x_0} Phi
    total += sigma * (
        math.exp(-0.5 * z_last * z_last) / _SQRT_2PI - z_last * float(ndtr(-z_last))
    )  # int_{x_{n-1}}^{inf} (1 - Phi)

    a, b = x[:-1], x[1:]
    c = np.arange(1, n, dtype=float) / n
    ga, gb = big_g[:-1], big_g[1:]
    xc = sigma * ndtri(c)
    inside = (a < xc) & (xc < b)
    seg = np.abs(c * (b - a) - (gb - ga))
    if inside.any():
        gc = gauss_cdf_antideriv(xc[inside])
        ci, ai, bi = c[inside], a[inside], b[inside]
        seg_split = np.abs(ci * (xc[inside] - ai) - (gc - ga[inside])) + np.abs(
            ci * (bi - xc[inside]) - (gb[inside] - gc)
        )
        seg = np.where(inside, 0.0, seg)
        total += float(seg_split.sum())
    total += float(seg.sum())
    return float(total)


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelSchedule:
    """Moving levels u_T = c (log T)^gamma."""

    c: float
    gamma: float

    def level(self, big_t: float) -> float:
        return self.c * math.log(big_t) ** self.gamma


@dataclass(frozen=True)
class ExperimentConfig:
    model: CovarianceModel
    T_ladder: tuple[float, ...]
    replicates: int
    master_seed: int
    mode: str
    h: float | None = None  # None: resolve 1 - rho(h) <= 0.01
    u: float | None = None
    u_schedule: LevelSchedule | None = None
    beta: float | None = None  # moving mode truncation budget

    def __post_init__(self) -> None:
        if self.mode not in (FIXED, MOVING):
            raise ValueError(f"mode must be 'fixed' or 'moving', got {self.mode!r}")
        if self.replicates < 100:
            raise ValueError(
                f"need >= 100 replicates for a usable W1 estimate, got {self.replicates}"
            )
        ladder = tuple(self.T_ladder)
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("T_ladder must be non-empty and strictly increasing")
        if self.mode == FIXED:
            if self.u is None:
                raise ValueError("fixed mode needs a level u")
        else:
            if self.u is None and self.u_schedule is None:
                raise ValueError("moving mode needs u or a u_schedule")
            if self.beta is None:
                raise ValueError("moving mode needs beta in (0, d/2)")

    def spacing(self) -> float:
        return self.h if self.h is not None else default_spacing(self.model)

    def level_at(self, big_t: float) -> float:
        if self.u_schedule is not None:
            return self.u_schedule.level(big_t)
        return float(self.u)


def config_from_dict(spec: dict) -> ExperimentConfig:
    sched = spec.get("u_schedule")
    grid = spec.get("grid", {})
    return ExperimentConfig(
        model=model_from_dict(spec["model"]),
        T_ladder=tuple(float(t) for t in spec["T_ladder"]),
        replicates=int(spec["replicates"]),
        master_seed=int(spec.get("master_seed", spec.get("seed", 0))),
        mode=spec["mode"],
        h=float(grid["h"]) if "h" in grid else None,
        u=float(spec["u"]) if "u" in spec else None,
        u_schedule=LevelSchedule(float(sched["c"]), float(sched["gamma"]))
        if sched
        else None,
        beta=float(spec["beta"]) if "beta" in spec else None,
    )


# ---------------------------------------------------------------------------
# report rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    T: float
    u_eff: float
    R: int
    W1_emp: float | None = None
    W1_half_spread: float | None = None
    sigma2_or_var: float | None = None
    bound_total: float | None = None
    bound_d1: float | None = None
    bound_d2: float | None = None
    bound_d3: float | None = None
    bound_term_body: float | None = None
    bound_term_tail: float | None = None
    n_trunc: int | None = None
    var_ratio: float | None = None
    corollary_ok: bool | None = None
    mean_raw: float | None = None
    mean_target: float | None = None
    mean_within_3se: bool | None = None
    status: str = "ok"


@dataclass(frozen=True)
class ConvergenceReport:
    mode: str
    rows: tuple[ReportRow, ...]
    metadata: dict


# ---------------------------------------------------------------------------
# replicate execution
# ---------------------------------------------------------------------------


def _simulate_chunk(args) -> tuple[list[int], list[float]]:
    model, grid, u, master_seed, indices = args
    raws = [
        sojourn_time(sample_field(model, grid, master_seed, r), u) for r in indices
    ]
    return list(indices), raws


def resolve_workers(requested: int | None) -> int:
    """Requested worker count (default 1) capped by the SOJOURN_WORKERS env var."""
    workers = 1 if requested is None else max(1, int(requested))
    cap = os.environ.get(WORKERS_ENV)
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _raw_sojourn_times(
    model: CovarianceModel,
    grid: GridSpec,
    u: float,
    master_seed: int,
    replicates: int,
    workers: int,
) -> np.ndarray:
    """Raw sojourn times for replicates 0..R-1, identical for any worker count."""
    indices = list(range(replicates))
    if workers <= 1:
        _, raws = _simulate_chunk((model, grid, u, master_seed, indices))
        return np.asarray(raws)
    chunk = math.ceil(replicates / workers)
    tasks = [
        (model, grid, u, master_seed, indices[lo : lo + chunk])
        for lo in range(0, replicates, chunk)
    ]
    out = np.empty(replicates)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for idx, raws in pool.map(_simulate_chunk, tasks):
            out[idx] = raws
    return out


def _half_sample_spread(stats: np.ndarray, sigma: float) -> float:
    half = stats.size // 2
    w_a = wasserstein1_to_gaussian(stats[:half], sigma)
    w_b = wasserstein1_to_gaussian(stats[half:], sigma)
    return abs(w_a - w_b)


def _mean_check(raws: np.ndarray, target: float) -> tuple[float, bool]:
    se = float(raws.std(ddof=1)) / math.sqrt(raws.size)
    mean = float(raws.mean())
    return mean, abs(mean - target) <= 3.0 * se


# ---------------------------------------------------------------------------
# studies
# ---------------------------------------------------------------------------


def run_fixed_level_study(
    config: ExperimentConfig, workers: int | None = None
) -> ConvergenceReport:
    """Fixed-level study: W1 of (S_T - T^d q)/sqrt(T^d) against N(0, sigma^2),
    with the fixed-level rate bound attached per window size."""
    if config.mode != FIXED:
        raise ValueError("config.mode must be 'fixed'")
    workers = resolve_workers(workers)
    model = config.model
    h = config.spacing()
    u = float(config.u)
    q = tail_prob(u)
    sig2 = sigma_squared(model, u, tol=1e-8)
    sigma = math.sqrt(sig2)
    rows = []
    for big_t in config.T_ladder:
        try:
            grid = GridSpec(d=model.d, T=big_t, h=h)
            extent = grid.extent
            raws = _raw_sojourn_times(
                model, grid, u, config.master_seed, config.replicates, workers
            )
            ctx = TheoryContext(tail_probability=q, d=model.d)
            stats = np.asarray(
                [
                    normalize(r, extent, u, FIXED, ctx).centered_normalized
                    for r in raws
                ]
            )
            bound = fixed_level_bound(model, u, big_t)
            target = extent ** model.d * q
            mean_raw, mean_ok = _mean_check(raws, target)
            rows.append(
                ReportRow(
                    T=big_t,
                    u_eff=u,
                    R=config.replicates,
                    W1_emp=wasserstein1_to_gaussian(stats, sigma),
                    W1_half_spread=_half_sample_spread(stats, sigma),
                    sigma2_or_var=sig2,
                    bound_total=bound.total,
                    bound_d1=bound.d1,
                    bound_d2=bound.d2,
                    bound_d3=bound.d3,
                    n_trunc=bound.n_trunc,
                    mean_raw=mean_raw,
                    mean_target=target,
                    mean_within_3se=mean_ok,
                )
            )
        except (SojournError, ValueError, ZeroDivisionError) as exc:
            rows.append(
                ReportRow(
                    T=big_t, u_eff=u, R=config.replicates,
                    status=f"error: {exc}",
                )
            )
    meta = {
        "mode": FIXED,
        "model": model_to_dict(model),
        "h": h,
        "u": u,
        "master_seed": config.master_seed,
        "replicates": config.replicates,
    }
    return ConvergenceReport(mode=FIXED, rows=tuple(rows), metadata=meta)


def run_moving_level_study(
    config: ExperimentConfig, workers: int | None = None
) -> ConvergenceReport:
    """Moving-level study: W1 of (S_T - E S_T)/sqrt(Var S_T) against N(0, 1).

    The normalisation uses the exact finite-window variance, not its
    high-level asymptotic; their ratio is reported per row, and the
    level-schedule admissibility flag comes from the corollary condition.
    """
    if config.mode != MOVING:
        raise ValueError("config.mode must be 'moving'")
    workers = resolve_workers(workers)
    model = config.model
    h = config.spacing()
    alpha = local_exponent(model).alpha
    corollary_ok = (
        corollary_condition(config.u_schedule.gamma, alpha)
        if config.u_schedule is not None
        else None
    )
    rows = []
    for big_t in config.T_ladder:
        u_eff = config.level_at(big_t)
        try:
            grid = GridSpec(d=model.d, T=big_t, h=h)
            extent = grid.extent
            q = tail_prob(u_eff)
            variance = var_sojourn_exact(model, extent, u_eff)
            raws = _raw_sojourn_times(
                model, grid, u_eff, config.master_seed, config.replicates, workers
            )
            ctx = TheoryContext(tail_probability=q, d=model.d, variance=variance)
            stats = np.asarray(
                [
                    normalize(r, extent, u_eff, MOVING, ctx).centered_normalized
                    for r in raws
                ]
            )
            bound = moving_level_bound(model, u_eff, big_t, float(config.beta))
            asym = extent ** model.d * berman_b_asymptotic(model, u_eff)
            target = extent ** model.d * q
            mean_raw, mean_ok = _mean_check(raws, target)
            rows.append(
                ReportRow(
                    T=big_t,
                    u_eff=u_eff,
                    R=config.replicates,
                    W1_emp=wasserstein1_to_gaussian(stats, 1.0),
                    W1_half_spread=_half_sample_spread(stats, 1.0),
                    sigma2_or_var=variance,
                    bound_total=bound.total,
                    bound_term_body=bound.term_body,
                    bound_term_tail=bound.term_tail,
                    n_trunc=bound.n_trunc,
                    var_ratio=variance / asym,
                    corollary_ok=corollary_ok,
                    mean_raw=mean_raw,
                    mean_target=target,
                    mean_within_3se=mean_ok,
                )
            )
        except (SojournError, ValueError, ZeroDivisionError) as exc:
            rows.append(
                ReportRow(
                    T=big_t, u_eff=u_eff, R=config.replicates,
                    status=f"error: {exc}",
                )
            )
    meta = {
        "mode": MOVING,
        "model": model_to_dict(model),
        "h": h,
        "master_seed": config.master_seed,
        "replicates": config.replicates,
        "beta": config.beta,
    }
    if config.u_schedule is not None:
        meta["u_schedule"] = {"c": config.u_schedule.c, "gamma": config.u_schedule.gamma}
    else:
        meta["u"] = config.u
    return ConvergenceReport(mode=config.mode, rows=tuple(rows), metadata=meta)


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

_CSV_COLUMNS = [f.name for f in dataclass_fields(ReportRow)]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_report(report: ConvergenceReport, path, fmt: str = "csv") -> None:
    """Write a report as RFC-4180 CSV or as a self-contained SVG log-log plot."""
    if not report.rows:
        raise ValueError("refusing to emit an empty report")
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(_CSV_COLUMNS)
        for row in report.rows:
            writer.writerow([_format_cell(getattr(row, c)) for c in _CSV_COLUMNS])
        _write_text(path, buf.getvalue())
    elif fmt == "svg":
        _write_text(path, render_report_svg(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report_csv(path) -> list[dict]:
    """Parse a report CSV back into row dicts (inverse of the csv emitter)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            row = {}
            for key, cell in record.items():
                if cell == "":
                    row[key] = None
                elif key in ("R", "n_trunc"):
                    row[key] = int(cell)
                elif key in ("corollary_ok", "mean_within_3se"):
                    row[key] = cell == "true"
                elif key == "status":
                    row[key] = cell
                else:
                    row[key] = float(cell)
            out.append(row)
    return out


# ---------------------------------------------------------------------------
# SVG rendering (no external assets)
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H = 640, 440
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 30, 50


def render_report_svg(report: ConvergenceReport) -> str:
    """Log-log plot of W1_emp and bound_total against T, as standalone SVG."""
    pts = [
        (row.T, row.W1_emp, row.bound_total)
        for row in report.rows
        if row.W1_emp is not None and row.W1_emp > 0.0
    ]
    if not pts:
        raise ValueError("report has no plottable rows")
    xs = [math.log10(p[0]) for p in pts]
    ys = [math.log10(p[1]) for p in pts]
    ys += [math.log10(p[2]) for p in pts if p[2] is not None and p[2] > 0.0]
    x_lo, x_hi = min(xs) - 0.1, max(xs) + 0.1
    y_lo, y_hi = min(ys) - 0.2, max(ys) + 0.2

    def sx(lx: float) -> float:
        return _MARGIN_L + (lx - x_lo) / (x_hi - x_lo) * (_SVG_W - _MARGIN_L - _MARGIN_R)

    def sy(ly: float) -> float:
        return _SVG_H - _MARGIN_B - (ly - y_lo) / (y_hi - y_lo) * (
            _SVG_H - _MARGIN_T - _MARGIN_B
        )

    def polyline(series, color: str) -> str:
        coords = " ".join(f"{sx(math.log10(t)):.2f},{sy(math.log10(v)):.2f}" for t, v in series)
        dots = "".join(
            f'<circle cx="{sx(math.log10(t)):.2f}" cy="{sy(math.log10(v)):.2f}" '
            f'r="3" fill="{color}"/>'
            for t, v in series
        )
        return (
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>' + dots
        )

    w1_series = [(p[0], p[1]) for p in pts]
    bound_series = [(p[0], p[2]) for p in pts if p[2] is not None and p[2] > 0.0]

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<line x1="{_MARGIN_L}" y1="{_SVG_H - _MARGIN_B}" x2="{_SVG_W - _MARGIN_R}" '
        f'y2="{_SVG_H - _MARGIN_B}" stroke="black"/>',
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" '
        f'y2="{_SVG_H - _MARGIN_B}" stroke="black"/>',
    ]
    for dec in range(math.floor(x_lo), math.ceil(x_hi) + 1):
        if x_lo <= dec <= x_hi:
            x = sx(dec)
            parts.append(
                f'<line x1="{x:.2f}" y1="{_SVG_H - _MARGIN_B}" x2="{x:.2f}" '
                f'y2="{_SVG_H - _MARGIN_B + 5}" stroke="black"/>'
                f'<text x="{x:.2f}" y="{_SVG_H - _MARGIN_B + 20}" font-size="12" '
                f'text-anchor="middle">1e{dec}</text>'
            )
    for dec in range(math.floor(y_lo), math.ceil(y_hi) + 1):
        if y_lo <= dec <= y_hi:
            y = sy(dec)
            parts.append(
                f'<line x1="{_MARGIN_L - 5}" y1="{y:.2f}" x2="{_MARGIN_L}" '
                f'y2="{y:.2f}" stroke="black"/>'
                f'<text x="{_MARGIN_L - 8}" y="{y + 4:.2f}" font-size="12" '
                f'text-anchor="end">1e{dec}</text>'
            )
    parts.append(polyline(w1_series, "#1f77b4"))
    if bound_series:
        parts.append(polyline(bound_series, "#d62728"))
    parts.append(
        f'<text x="{(_SVG_W + _MARGIN_L - _MARGIN_R) / 2}" y="{_SVG_H - 12}" '
        f'font-size="13" text-anchor="middle">window size T (log scale)</text>'
    )
    parts.append(
        f'<text x="16" y="{(_SVG_H + _MARGIN_T - _MARGIN_B) / 2}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 16 '
        f'{(_SVG_H + _MARGIN_T - _MARGIN_B) / 2})">W1 / bound (log scale)</text>'
    )
    parts.append(
        f'<text x="{_SVG_W - _MARGIN_R - 10}" y="{_MARGIN_T + 8}" font-size="12" '
        f'text-anchor="end" fill="#1f77b4">empirical W1</text>'
    )
    if bound_series:
        parts.append(
            f'<text x="{_SVG_W - _MARGIN_R - 10}" y="{_MARGIN_T + 24}" font-size="12" '
            f'text-anchor="end" fill="#d62728">rate bound</text>'
        )
    parts.append("</svg>")
    return "".join(parts)


# ---------------------------------------------------------------------------
# raw field dumps
# ---------------------------------------------------------------------------

FIELD_DUMP_MAGIC = b"SJRN"
FIELD_DUMP_VERSION = 1
_HEADER_FORMAT = "<4s5I2dQ16x"  # magic, version, d, n, replicates, reserved, h, T, seed
_HEADER_SIZE = struct.calcsize(_HEADER_FORMAT)
assert _HEADER_SIZE == 64


def write_field_dump(
    path,
    model: CovarianceModel,
    grid: GridSpec,
    master_seed: int,
    replicates: int,
) -> None:
    """Dump replicates 0..R-1 as flat little-endian float64 grids after a
    64-byte header (magic 'SJRN', version, d, n per axis, R, h, T, seed)."""
    if replicates < 1:
        raise ValueError("need at least one replicate")
    header = struct.pack(
        _HEADER_FORMAT,
        FIELD_DUMP_MAGIC,
        FIELD_DUMP_VERSION,
        grid.d,
        grid.n_points_per_axis,
        replicates,
        0,
        grid.h,
        grid.T,
        master_seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for r in range(replicates):
            sample = sample_field(model, grid, master_seed, r)
            fh.write(np.ascontiguousarray(sample.values, dtype="<f8").tobytes())


def read_field_dump(path) -> tuple[dict, np.ndarray]:
    """Read a field dump back as (header dict, array of shape (R, n[, n]))."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER_SIZE)
        magic, version, d, n, reps, _reserved, h, big_t, seed = struct.unpack(
            _HEADER_FORMAT, header
        )
        if magic != FIELD_DUMP_MAGIC:
            raise ValueError(f"not a field dump: bad magic {magic!r}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    shape = (reps, n) if d == 1 else (reps, n, n)
    return (
        {
            "version": version,
            "d": d,
            "n_points_per_axis": n,
            "replicates": reps,
            "h": h,
            "T": big_t,
            "master_seed": seed,
        },
        data.reshape(shape),
    )
