"""Command-line interface.

Subcommands:
  theory sigma2|var-sojourn|berman-b|bounds   one-row CSV of theory values
  check inequalities                          exact combinatorial certificates
  study fixed|moving                          Monte Carlo convergence report
  simulate                                    raw field dump (binary)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .bounds import fixed_level_bound, moving_level_bound
from .covariance import model_from_dict
from .hermite import chaos_variance_inequality
from .sampler import GridSpec
from .study import (
    config_from_dict,
    emit_report,
    run_fixed_level_study,
    run_moving_level_study,
    write_field_dump,
)
from .variance import berman_b_asymptotic, sigma_squared, var_sojourn_exact


def _parse_model(text: str):
    try:
        return model_from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError) as exc:
        raise SystemExit(f"invalid --model JSON: {exc}")


def _emit_row(columns, values, out_path: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    writer.writerow(
        [format(v, ".17g") if isinstance(v, float) else v for v in values]
    )
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _load_config(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_theory(args) -> int:
    model = _parse_model(args.model)
    if args.quantity == "sigma2":
        value = sigma_squared(model, args.u, tol=args.tol)
        _emit_row(["u", "sigma2"], [args.u, value], args.out)
    elif args.quantity == "var-sojourn":
        value = var_sojourn_exact(model, args.T, args.u)
        _emit_row(["T", "u", "var_sojourn"], [args.T, args.u, value], args.out)
    elif args.quantity == "berman-b":
        value = berman_b_asymptotic(model, args.u)
        _emit_row(["u", "berman_b"], [args.u, value], args.out)
    else:  # bounds
        if args.mode == "fixed":
            rb = fixed_level_bound(model, args.u, args.T)
            cols = ["T", "u", "mode", "n_trunc", "d1", "d2", "d3", "total"]
            vals = [rb.T, rb.u, rb.mode, rb.n_trunc, rb.d1, rb.d2, rb.d3, rb.total]
        else:
            if args.beta is None:
                raise SystemExit("--beta is required for --mode moving")
            rb = moving_level_bound(model, args.u, args.T, args.beta)
            cols = ["T", "u", "mode", "n_trunc", "term_body", "term_tail", "total"]
            vals = [rb.T, rb.u, rb.mode, rb.n_trunc, rb.term_body, rb.term_tail, rb.total]
        for name in sorted(rb.constants_profile):
            cols.append(f"const_{name}")
            vals.append(rb.constants_profile[name])
        _emit_row(cols, vals, args.out)
    return 0


def _cmd_check(args) -> int:
    failures = 0
    for p in range(2, args.p_max + 1):
        cert = chaos_variance_inequality(p)
        status = "ok" if cert.holds else "VIOLATED"
        print(f"p={p}: lhs={cert.lhs} rhs={cert.rhs} {status}")
        failures += 0 if cert.holds else 1
    print(f"checked p=2..{args.p_max}: {failures} violation(s)")
    return 1 if failures else 0


def _cmd_study(args) -> int:
    config = config_from_dict(_load_config(args.config))
    if config.mode != args.mode:
        raise SystemExit(
            f"config mode {config.mode!r} does not match subcommand {args.mode!r}"
        )
    runner = run_fixed_level_study if args.mode == "fixed" else run_moving_level_study
    report = runner(config, workers=args.workers)
    emit_report(report, args.out, "csv")
    if args.plot:
        emit_report(report, args.plot, "svg")
    bad = [row for row in report.rows if row.status != "ok"]
    for row in bad:
        print(f"T={row.T}: {row.status}", file=sys.stderr)
    print(f"wrote {args.out} ({len(report.rows)} rows, {len(bad)} with errors)")
    return 1 if bad else 0


def _cmd_simulate(args) -> int:
    spec = _load_config(args.config)
    model = model_from_dict(spec["model"])
    grid_spec = spec["grid"]
    grid = GridSpec(d=model.d, T=float(grid_spec["T"]), h=float(grid_spec["h"]))
    seed = int(spec.get("master_seed", spec.get("seed", 0)))
    replicates = int(spec.get("replicates", 1))
    write_field_dump(args.out, model, grid, seed, replicates)
    print(f"wrote {args.out} ({replicates} replicate(s), {grid.n_points_per_axis}^{grid.d} points)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sojourn-clt",
        description="Sojourn-time CLT theory values, rate bounds, and Monte Carlo studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    theory = sub.add_parser("theory", help="closed-form / quadrature theory values")
    theory.add_argument("quantity", choices=["sigma2", "var-sojourn", "berman-b", "bounds"])
    theory.add_argument("--model", required=True, help="covariance model as JSON")
    theory.add_argument("--u", type=float, required=True, help="level")
    theory.add_argument("--T", type=float, help="window size")
    theory.add_argument("--tol", type=float, default=1e-8)
    theory.add_argument("--mode", choices=["fixed", "moving"], default="fixed")
    theory.add_argument("--beta", type=float, help="moving-mode truncation budget")
    theory.add_argument("--out", help="write the CSV row here instead of stdout")
    theory.set_defaults(func=_cmd_theory)

    check = sub.add_parser("check", help="exact-arithmetic certificates")
    check.add_argument("what", choices=["inequalities"])
    check.add_argument("--p-max", type=int, default=50, dest="p_max")
    check.set_defaults(func=_cmd_check)

    study = sub.add_parser("study", help="run a Monte Carlo convergence study")
    study.add_argument("mode", choices=["fixed", "moving"])
    study.add_argument("--config", required=True, help="experiment config JSON")
    study.add_argument("--out", required=True, help="report CSV path")
    study.add_argument("--plot", help="optional SVG plot path")
    study.add_argument("--workers", type=int, default=None)
    study.set_defaults(func=_cmd_study)

    simulate = sub.add_parser("simulate", help="dump raw field replicates")
    simulate.add_argument("--config", required=True, help="simulation config JSON")
    simulate.add_argument("--out", required=True, help="binary dump path")
    simulate.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "theory":
        needs_t = args.quantity in ("var-sojourn", "bounds")
        if needs_t and args.T is None:
            raise SystemExit(f"--T is required for {args.quantity}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
