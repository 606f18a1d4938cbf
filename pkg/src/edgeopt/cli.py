"""Command-line front end.

Subcommands: ``generate`` (emit a scenario file), ``solve`` (one scenario,
one strategy), ``sweep`` (strategy comparison to CSV), ``verify`` (oracle
suite against exhaustive ground truth). Exit codes: 0 success, 1 usage
error, 2 solver failure without fallback.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CapacityError,
    ScenarioParseError,
    SolverFailureError,
    ValidationError,
)
from .harness import OracleConfig, SweepConfig, run_comparison, run_oracle_suite
from .optimizer import STRATEGIES, solve_strategy
from .scenario import generate_scenario, load_scenario, save_scenario, with_params

_DEFAULT_OMEGAS = (2.0, 4.0)
_DEFAULT_DMINS = (1.0, 2.0, 3.0, 4.0, 5.0)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_solver_flags(p):
    p.add_argument("--samples", type=int, default=100,
                   help="Gaussian rounding candidates per relaxation")
    p.add_argument("--sdr-size-cap", type=int, default=60,
                   help="max users*servers routed through the relaxation")
    p.add_argument("--sdr-subsample", type=int, default=0,
                   help="above the cap, relax this many subsampled users (0 = greedy fallback)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="edgeopt",
        description="Joint downlink data-size and user-server association optimization.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser(
        "generate", help="generate a random scenario file",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    gen.add_argument("--users", type=int, default=100)
    gen.add_argument("--servers", type=int, default=20)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--dmin", type=float, default=1.0, help="minimum downlink size, Mbit")
    gen.add_argument("--dmax", type=float, default=10.0, help="maximum downlink size, Mbit")
    gen.add_argument("--omega", type=float, default=2.0, help="latency weight")
    gen.add_argument("--out", required=True, help="scenario file to write")
    gen.set_defaults(func=_cmd_generate)

    sol = sub.add_parser(
        "solve", help="solve one scenario with one strategy",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sol.add_argument("--scenario", default=None,
                     help="scenario file; omitted means generate from --users/--servers/--seed")
    sol.add_argument("--users", type=int, default=100)
    sol.add_argument("--servers", type=int, default=20)
    sol.add_argument("--seed", type=int, default=0)
    sol.add_argument("--strategy", choices=STRATEGIES, default="optimal_latency_earning")
    sol.add_argument("--omega", type=float, default=None, help="override the scenario's omega")
    sol.add_argument("--dmin", type=float, default=None, help="override the scenario's d_min")
    sol.add_argument("--dmax", type=float, default=None, help="override the scenario's d_max")
    sol.add_argument("--max-iters", type=int, default=20)
    sol.add_argument("--tol", type=float, default=1e-6,
                     help="relative utility improvement stopping threshold")
    _add_solver_flags(sol)
    sol.add_argument("--out", default=None, help="optional JSON result path")
    sol.set_defaults(func=_cmd_solve)

    sw = sub.add_parser(
        "sweep", help="strategy comparison sweep to CSV",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sw.add_argument("--users", type=int, default=100)
    sw.add_argument("--servers", type=int, default=20)
    sw.add_argument("--omega", type=float, action="append", default=None,
                    help="latency weight, repeatable (default: 2 4)")
    sw.add_argument("--dmin", type=float, action="append", default=None,
                    help="minimum downlink size, repeatable (default: 1 2 3 4 5)")
    sw.add_argument("--dmax", type=float, default=10.0)
    sw.add_argument("--seeds", type=int, default=10, help="number of seeds, 0..N-1")
    sw.add_argument("--strategy", action="append", choices=STRATEGIES, default=None,
                    help="strategy to include, repeatable (default: all four)")
    _add_solver_flags(sw)
    sw.add_argument("--timing", action="store_true",
                    help="write measured wall times (breaks byte-determinism)")
    sw.add_argument("--out", required=True, help="CSV path to write")
    sw.set_defaults(func=_cmd_sweep)

    ver = sub.add_parser(
        "verify", help="oracle-verification suite on small instances",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    ver.add_argument("--users", type=int, action="append", default=None,
                     help="small instance size, repeatable, cycled over seeds (default: 5 6 7)")
    ver.add_argument("--servers", type=int, default=3)
    ver.add_argument("--seeds", type=int, default=50, help="number of seeds, 0..N-1")
    ver.add_argument("--omega", type=float, default=2.0)
    ver.add_argument("--samples", type=int, default=100)
    ver.add_argument("--out", default=None, help="report path (default: stdout)")
    ver.set_defaults(func=_cmd_verify)
    return parser


def _cmd_generate(args) -> int:
    scenario = generate_scenario(
        args.users, args.servers, args.seed,
        d_min=args.dmin, d_max=args.dmax, omega=args.omega)
    save_scenario(scenario, args.out)
    print(f"wrote scenario ({scenario.n_users} users, {scenario.n_servers} servers) "
          f"to {args.out}")
    return 0


def _cmd_solve(args) -> int:
    if args.scenario is not None:
        scn = load_scenario(args.scenario)
    else:
        scn = generate_scenario(args.users, args.servers, args.seed)
    if args.omega is not None or args.dmin is not None or args.dmax is not None:
        scn = with_params(scn, omega=args.omega, d_min=args.dmin, d_max=args.dmax)
    result = solve_strategy(
        scn, args.strategy, args.seed, max_iters=args.max_iters, tol=args.tol,
        samples=args.samples, sdr_size_cap=args.sdr_size_cap,
        sdr_subsample=args.sdr_subsample)
    m = result.metrics
    print(f"strategy        {result.strategy}")
    print(f"instance        {scn.n_users} users, {scn.n_servers} servers, "
          f"omega={scn.utility_params.omega:g}, d in [{scn.d_min:g}, {scn.d_max:g}]")
    print(f"utility         {m.utility:.6f}")
    print(f"total earning   {m.total_earning:.6f}")
    print(f"total latency   {m.total_latency:.6f} s "
          f"(avg {m.total_latency / scn.n_users:.6f} s/user)")
    print(f"iterations      {result.iterations}")
    if result.diagnostics.sdr_gap is not None:
        print(f"sdr gap         {result.diagnostics.sdr_gap:.6e}")
    if result.diagnostics.fallbacks:
        print(f"fallbacks       {';'.join(result.diagnostics.fallbacks)}")
    print(f"wall time       {result.diagnostics.wall_time:.3f} s")
    if args.out:
        payload = {
            "strategy": result.strategy,
            "seed": args.seed,
            "utility": m.utility,
            "total_earning": m.total_earning,
            "total_latency": m.total_latency,
            "avg_latency": m.total_latency / scn.n_users,
            "iterations": result.iterations,
            "utility_trace": list(result.utility_trace),
            "server_of": result.assignment.server_of.tolist(),
            "d": result.plan.d.tolist(),
            "fallbacks": list(result.diagnostics.fallbacks),
            "sdr_gap": result.diagnostics.sdr_gap,
            "wall_time": result.diagnostics.wall_time,
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote result to {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    config = SweepConfig(
        users=args.users,
        servers=args.servers,
        omegas=tuple(args.omega) if args.omega else _DEFAULT_OMEGAS,
        d_mins=tuple(args.dmin) if args.dmin else _DEFAULT_DMINS,
        d_max=args.dmax,
        seeds=tuple(range(args.seeds)),
        strategies=tuple(args.strategy) if args.strategy else STRATEGIES,
        samples=args.samples,
        sdr_size_cap=args.sdr_size_cap,
        sdr_subsample=args.sdr_subsample,
        timing=args.timing,
    )
    records = run_comparison(config, out_path=args.out)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    config = OracleConfig(
        user_sizes=tuple(args.users) if args.users else (5, 6, 7),
        servers=args.servers,
        n_seeds=args.seeds,
        omega=args.omega,
        samples=args.samples,
    )
    report = run_oracle_suite(config, out_path=args.out)
    if args.out:
        print(f"wrote report to {args.out}")
        print(f"overall: {'PASS' if report.passed else 'FAIL'} "
              f"({report.wall_time:.1f} s)")
    else:
        print(report.render(), end="")
    return 0 if report.passed else 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ScenarioParseError, CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
