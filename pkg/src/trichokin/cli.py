"""Command-line front end: ``trichokin run|sweep|check``.

Exit codes: 0 success, 1 acceptance check failed, 2 invalid input or a
failed simulation, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .harness import FORMATTERS, ScenarioRunError, emit_outputs, run_scenario, run_sweep
from .kinetics import DomainError
from .scenarios import BUILTIN_SCENARIOS, BUILTIN_SWEEPS, ScenarioError, load_scenario, load_sweep

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


def _overrides(args) -> dict:
    out = {}
    if args.step is not None:
        out["h"] = args.step
    if args.horizon is not None:
        out["t_end"] = args.horizon
    if args.steady_tol is not None:
        out["steady_tol"] = args.steady_tol
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--step", type=float, help="RK4 step size [h] (default 0.01)")
    common.add_argument("--horizon", type=float, help="final time [h] (default 2000)")
    common.add_argument("--steady-tol", type=float, help="max |rhs| for steady state (default 1e-10)")
    common.add_argument("--out", help="directory for trajectory CSVs and summary files")
    common.add_argument("--format", choices=sorted(FORMATTERS), default="table", help="summary printed to stdout")
    common.add_argument("--with-z", action="store_true", help="add the Z column to trajectory CSVs")

    p = argparse.ArgumentParser(prog="trichokin", description=__doc__.splitlines()[0])
    p.add_argument("--list-scenarios", action="store_true", help="list built-in scenarios and sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", parents=[common], help="simulate one scenario")
    r.add_argument("scenario", help="built-in name or YAML file")
    s = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    s.add_argument("spec", help="built-in sweep (x0-sweep, kd-sweep) or YAML file")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub.add_parser("check", help="run the acceptance criteria")
    return p


def _list_scenarios() -> None:
    for name, sc in BUILTIN_SCENARIOS.items():
        g = sc.params.growth
        print(f"scenario  {name:14s} initial={tuple(sc.initial)} mu_max={g.mu_max:g} k_s={g.k_s:g} k_d={sc.params.k_d:g}")
    for name, sw in BUILTIN_SWEEPS.items():
        print(f"sweep     {name:14s} base={sw.base.name} {sw.parameter} in {list(sw.values)}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.list_scenarios:
        _list_scenarios()
        if args.command is None:
            return EXIT_OK
    if args.command is None:
        build_parser().print_usage(sys.stderr)
        return EXIT_INVALID

    try:
        if args.command == "check":
            from .acceptance import run_all

            results = run_all()
            return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED

        status = EXIT_OK
        if args.command == "run":
            results = [run_scenario(load_scenario(args.scenario), **_overrides(args))]
        else:
            rows = run_sweep(load_sweep(args.spec), jobs=args.jobs, **_overrides(args))
            for row in rows:
                if row.error:
                    print(f"error: {row.error}", file=sys.stderr)
                    status = EXIT_INVALID
            results = [row.result for row in rows if row.result is not None]
            if not results:
                return EXIT_INVALID

        sys.stdout.write(FORMATTERS[args.format]([r.summary for r in results]))
        if args.out:
            emit_outputs(results, args.out, with_z=args.with_z)
        return status
    except (ScenarioError, ScenarioRunError, DomainError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
