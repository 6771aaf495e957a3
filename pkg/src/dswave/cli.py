"""Command-line entry point: ``dswave {run,sweep,converge,crosscheck,oracle}``.

Exit codes: 0 success, 1 invalid input, 2 numerical event with
``--fail-on-blowup``, 3 internal error. Every failure also writes one JSON
record to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, parse_config
from .energy import index_label
from .equations import EquationKind
from .experiments import (
    ConvergenceRefused,
    convergence_study,
    coordinate_crosscheck,
    fourier_mode_run,
    homogeneous_oracle,
    homogeneous_pde_run,
    lifespan_sweep,
    observed_orders,
    sweep_config,
)
from .grid import ConfigurationError, GridSpec
from .integrator import evolve
from .serialize import emit_series, table_csv, write_snapshot

EXIT_OK, EXIT_INVALID, EXIT_EVENT, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; route that to exit code 1 instead."""

    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_usage()}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers (got {text!r})")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers (got {text!r})")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dswave", description="Wave equations on a de Sitter background.")
    p.add_argument("-v", "--verbose", action="store_true", help="log integrator events")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="evolve one configuration")
    r.add_argument("--config", required=True, help="JSON run configuration")
    r.add_argument("--out", help="output directory (overrides output.directory)")
    r.add_argument("--fail-on-blowup", action="store_true")

    s = sub.add_parser("sweep", help="lifespan sweep of the generalized extremal equation")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--eps", type=_floats, required=True, help="comma-separated amplitudes")
    s.add_argument("--t-end", type=float, default=20.0)
    s.add_argument("--dims", type=int, default=1)
    s.add_argument("--points", type=int, default=257)
    s.add_argument("--extent", type=float, default=3.5)
    s.add_argument("--dt-max", type=float, default=0.01)
    s.add_argument("--out", help="write the sweep table here as well as to stdout")
    s.add_argument("--fail-on-blowup", action="store_true")

    c = sub.add_parser("converge", help="Richardson order estimate for one configuration")
    c.add_argument("--config", required=True)
    c.add_argument("--levels", type=int, default=3)
    c.add_argument("--refine", choices=("space", "time"), default="space")

    x = sub.add_parser("crosscheck", help="t-frame against tau-frame evolution (n = 1)")
    x.add_argument("--eps", type=float, default=0.01)
    x.add_argument("--t-c", type=float, default=4.0)
    x.add_argument("--points", type=_ints, default=[129, 257, 513])
    x.add_argument("--extent", type=float, default=3.5)

    o = sub.add_parser("oracle", help="compare the solver with an ODE oracle")
    o.add_argument("--case", choices=("riccati", "linear", "fourier"), required=True)
    o.add_argument("--dt", type=float, default=1e-3)
    return p


def _print(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    out = evolve(cfg.initial_field(), cfg.equation, cfg.control, cfg.monitors)
    outdir = Path(args.out or cfg.output.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.json").write_text(cfg.dumps() + "\n")
    if cfg.output.series and cfg.monitors.energy and not cfg.equation.tau_frame:
        labels = [index_label(I, i0) for I, i0 in cfg.monitors.cap.indices(cfg.grid.dims)]
        emit_series(out.energy_series, outdir / "series.csv", labels)
    if cfg.output.snapshots:
        for i, snap in enumerate(out.trajectory):
            write_snapshot(outdir / f"snapshot_{i:05d}.bin", snap)
    summary = {
        "status": out.status.value,
        "final_time": out.final_time,
        "criterion": out.criterion.value if out.criterion else None,
        "t_detect": out.t_detect,
        "lifespan_lower_bound": out.lifespan_lower_bound,
        "steps": out.steps,
        "snapshots": len(out.trajectory),
        "output": str(outdir),
    }
    _print(json.dumps(summary, sort_keys=True))
    if out.message:
        logging.getLogger("dswave").info(out.message)
    if args.fail_on_blowup and not out.completed:
        return EXIT_EVENT
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = sweep_config(args.alpha, args.t_end, args.dims, args.points, args.extent, dt_max=args.dt_max)
    res = lifespan_sweep(args.alpha, args.eps, cfg)
    rows = [(r.eps, r.alpha, r.lifespan_estimate, str(r.censored).lower(), r.criterion,
             r.resolution[0], r.resolution[1]) for r in res.records]
    table = table_csv(["eps", "alpha", "lifespan_estimate", "censored", "criterion", "h", "dt_max"], rows)
    _print(table)
    if args.out:
        Path(args.out).write_text(table)
    fit = res.fit
    summary = {
        "fit": None if fit is None else {"slope": fit.slope, "intercept": fit.intercept,
                                         "records_used": fit.records_used},
        "all_censored": res.all_censored,
        "c_calibrated": res.c_calibrated,
        "lower_bound_ok": res.lower_bound_ok,
        "monotone_ok": res.monotone_ok,
    }
    _print("# " + json.dumps(summary, sort_keys=True))
    if args.fail_on_blowup and not res.all_censored:
        return EXIT_EVENT
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = parse_config(args.config)
    rep = convergence_study(cfg.equation, cfg, args.levels, args.refine)
    rows = [(lvl, h, rep.differences[lvl] if lvl < len(rep.differences) else None)
            for lvl, h in enumerate(rep.spacings)]
    _print(table_csv(["level", "spacing", "difference_to_next"], rows))
    _print("# " + json.dumps({"refine": rep.refine, "t": rep.t, "orders": rep.orders,
                              "degenerate": rep.degenerate, "message": rep.message}, sort_keys=True))
    return EXIT_OK


def _cmd_crosscheck(args) -> int:
    hs, ds, rows = [], [], []
    for n in args.points:
        res = coordinate_crosscheck(GridSpec(1, args.extent, n), args.eps, args.t_c)
        hs.append(res.h)
        ds.append(res.discrepancy)
        rows.extend((n, res.h, float(t), float(tau), float(d))
                    for t, tau, d in zip(res.t_checkpoints, res.tau_checkpoints, res.discrepancies))
    _print(table_csv(["points", "h", "t", "tau", "discrepancy"], rows))
    _print("# " + json.dumps({"h": hs, "discrepancy": ds, "orders": observed_orders(hs, ds)}))
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.case == "riccati":
        eq = EquationKind.semilinear(1)
        ref = homogeneous_oracle(eq, 2.0, 2.0)
        out = homogeneous_pde_run(eq, 2.0, 2.0, args.dt)
        summary = {"t_star": ref.blowup_time, "t_star_closed_form": math.log(4.0) / 1.5,
                   "pde_status": out.status.value, "pde_criterion": out.criterion.value if out.criterion else None,
                   "pde_t_detect": out.t_detect,
                   "relative_difference": None if out.t_detect is None
                   else abs(out.t_detect - ref.blowup_time) / ref.blowup_time}
    elif args.case == "linear":
        eq = EquationKind.linear(1)
        out = homogeneous_pde_run(eq, 1.0, 1.0, args.dt)
        exact = math.exp(-1.5)
        summary = {"u_exact": exact, "u_pde": float(out.final.phi_t.flat[0]),
                   "relative_error": abs(float(out.final.phi_t.flat[0]) / exact - 1.0)}
    else:
        cmp_ = fourier_mode_run()
        summary = {"max_relative_error": cmp_.max_relative_error, "t_end": float(cmp_.times[-1])}
    _print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "converge": _cmd_converge,
             "crosscheck": _cmd_crosscheck, "oracle": _cmd_oracle}


def _error(kind: str, message: str, problems: Sequence[str] = ()) -> None:
    rec = {"error": kind, "message": message}
    if problems:
        rec["problems"] = list(problems)
    sys.stderr.write(json.dumps(rec) + "\n")


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        sys.stderr.write(str(err).split("\n\n", 1)[1])
        _error("usage", str(err).split("\n\n", 1)[0])
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        _error("config", "invalid configuration", err.problems)
        return EXIT_INVALID
    except (ConfigurationError, ValueError) as err:
        _error("invalid", str(err))
        return EXIT_INVALID
    except ConvergenceRefused as err:
        _error("refused", str(err))
        return EXIT_INVALID
    except Exception as err:  # noqa: BLE001 - the CLI reports, it does not crash
        _error("internal", f"{type(err).__name__}: {err}")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
