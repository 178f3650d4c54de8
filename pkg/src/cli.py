"""
Command-line front end for tree values, optimal allocations, sweeps and loss maps

Exit codes: 0 success, 2 invalid arguments, 3 infeasible capacity,
4 numerical non-convergence.
"""
import argparse
import os
import sys
import warnings

from src.config import (
    DEFAULT_B_MAX,
    DEFAULT_MC_RUNS,
    FD_STEP,
    LEARNING_RATE,
    MAX_ITERATIONS,
    REDUCED_MAX_ITERATIONS,
    THREADS_ENV_VAR,
    VALUE_TOLERANCE,
)
from src.excel_formatter import format_result_table_excel
from src.optimize import ConvergenceError, GradientConfig, optimize_heterogeneous, optimize_homogeneous
from src.policy import InfeasibleCapacityError
from src.reward_model import RewardFamily, make_reward_model
from src.sweep import (
    SweepSpec,
    build_table,
    fixed_point_row,
    load_sweep_spec,
    optimum_row,
    run_loss_map,
    run_sweep,
    write_table,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NOT_CONVERGED = 4


def parse_q(text):
    """Comma-separated q levels, deepest level first"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"q must be a comma-separated list of numbers, got {text!r}") from None


def resolve_threads(value):
    """--threads, else $BDTP_THREADS, else 1"""
    if value is None:
        env = os.environ.get(THREADS_ENV_VAR)
        if not env:
            return 1
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from None
    if value < 1:
        raise ValueError(f"threads must be >= 1, got {value}")
    return value


def _emit(table, args, title):
    write_table(table, out=args.out, as_json=args.json)
    xlsx = getattr(args, "xlsx", None)
    if xlsx:
        path = format_result_table_excel(table, title, output_file=xlsx)
        print(f"Excel file written: {path}", file=sys.stderr)
    return table


def exit_code_for(table):
    """Exit code of the first failed row of a written table (0 when every point succeeded)"""
    if table is None or "error" not in table.columns:
        return EXIT_OK
    failed = table.loc[table["error"] != "", "error"]
    if failed.empty:
        return EXIT_OK
    print(f"warning: {len(failed)} of {len(table)} points failed", file=sys.stderr)
    first = failed.iloc[0]
    if first.startswith(InfeasibleCapacityError.__name__):
        return EXIT_INFEASIBLE
    if first.startswith(ConvergenceError.__name__):
        return EXIT_NOT_CONVERGED
    return EXIT_INVALID


def cmd_value_exhaustive(args):
    spec = SweepSpec(mode="exhaustive", families=[(args.family, args.n)], b=[args.b], d=[args.d])
    return _emit(run_sweep(spec, raise_errors=True), args, "Exhaustive Value")


def cmd_value_selective(args):
    if len(args.q) != args.d:
        raise ValueError(f"--q has {len(args.q)} levels but --d is {args.d}")
    spec = SweepSpec(mode="selective", families=[(args.family, args.n)], b=[args.b], q=[args.q])
    return _emit(run_sweep(spec, raise_errors=True), args, "Selective Value")


def cmd_optimize_homogeneous(args):
    model = make_reward_model(args.family, args.n)
    result = optimize_homogeneous(model, args.capacity, args.b_max, threads=resolve_threads(args.threads))
    table = build_table([optimum_row(args.family, args.n, args.capacity, result)], "optimum")
    return _emit(table, args, "Homogeneous Optimum")


def cmd_optimize_heterogeneous(args):
    model = make_reward_model(args.family, args.n)
    config = GradientConfig(
        fd_step=args.fd_step,
        learning_rate=args.lr,
        max_iterations=MAX_ITERATIONS if args.full else args.max_iters,
        value_tolerance=args.tol,
        polish=args.polish,
    )
    result = optimize_heterogeneous(model, args.capacity, args.b_max, config=config,
                                    threads=resolve_threads(args.threads))
    table = build_table([optimum_row(args.family, args.n, args.capacity, result)], "optimum")
    return _emit(table, args, "Heterogeneous Optimum")


def cmd_mc(args):
    depth = {"q": [args.q]} if args.q is not None else {"d": [args.d]}
    if args.q is not None and args.d is not None and len(args.q) != args.d:
        raise ValueError(f"--q has {len(args.q)} levels but --d is {args.d}")
    spec = SweepSpec(mode="mc", mc_p=[args.p], b=[args.b], runs=args.runs, seed=args.seed, hard=args.hard,
                     **depth)
    return _emit(run_sweep(spec, raise_errors=True), args, "Monte Carlo Value")


def cmd_fixed_point(args):
    return _emit(build_table([fixed_point_row(args.p, args.b)], "fixed-point"), args, "Full Reward Fixed Point")


def _sweep_threads(args, spec):
    if args.threads is None and not os.environ.get(THREADS_ENV_VAR):
        return spec.threads
    return resolve_threads(args.threads)


def cmd_sweep(args):
    spec = load_sweep_spec(args.config)
    threads = _sweep_threads(args, spec)
    if args.out is None:
        args.out = spec.out
    print(f"Running {spec.mode} sweep with {threads} thread(s)...", file=sys.stderr)
    return _emit(run_sweep(spec, threads=threads), args, f"{spec.mode.title()} Sweep")


def cmd_loss_map(args):
    spec = load_sweep_spec(args.config, mode="loss-map")
    threads = _sweep_threads(args, spec)
    if args.out is None:
        args.out = spec.out
    print(f"Running loss map with {threads} thread(s)...", file=sys.stderr)
    return _emit(run_loss_map(spec, threads=threads), args, "Heuristic Loss Map")


def _add_output_options(parser, xlsx=False):
    parser.add_argument("--out", default=None, help="CSV/JSON output path (default: standard output)")
    parser.add_argument("--json", action="store_true", help="emit a JSON records array instead of CSV")
    parser.add_argument("--threads", type=int, default=None, help=f"worker threads (fallback: ${THREADS_ENV_VAR})")
    if xlsx:
        parser.add_argument("--xlsx", default=None, help="also write a formatted Excel workbook")


def _add_family_options(parser):
    parser.add_argument("--family", type=RewardFamily.parse, required=True, help="plus (p=n/(n+1)) or minus (p=1/(n+1))")
    parser.add_argument("--n", type=int, required=True, help="family parameter n >= 1")


def build_parser():
    parser = argparse.ArgumentParser(prog="bdtp", description="Breadth-depth tree planner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value-exhaustive", help="value of a fully sampled (b, d) tree")
    _add_family_options(p)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    _add_output_options(p)
    p.set_defaults(func=cmd_value_exhaustive)

    p = sub.add_parser("value-selective", help="value of a tree sampled with per-level probabilities q")
    _add_family_options(p)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=parse_q, required=True, help="comma list, deepest level first")
    _add_output_options(p)
    p.set_defaults(func=cmd_value_selective)

    p = sub.add_parser("optimize-homogeneous", help="best b for homogeneous policies at capacity C")
    _add_family_options(p)
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--b-max", type=int, default=DEFAULT_B_MAX)
    _add_output_options(p)
    p.set_defaults(func=cmd_optimize_homogeneous)

    p = sub.add_parser("optimize-heterogeneous", help="best (b, q) by projected gradient ascent")
    _add_family_options(p)
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--b-max", type=int, default=DEFAULT_B_MAX)
    p.add_argument("--fd-step", type=float, default=FD_STEP)
    p.add_argument("--lr", type=float, default=LEARNING_RATE)
    p.add_argument("--max-iters", type=int, default=REDUCED_MAX_ITERATIONS)
    p.add_argument("--tol", type=float, default=VALUE_TOLERANCE)
    p.add_argument("--full", action="store_true", help=f"use the full {MAX_ITERATIONS} iteration cap")
    p.add_argument("--polish", action="store_true", help="refine each ascent result with SLSQP")
    _add_output_options(p)
    p.set_defaults(func=cmd_optimize_heterogeneous)

    p = sub.add_parser("mc", help="Monte-Carlo value with backwards induction")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--q", type=parse_q, default=None, help="comma list, deepest level first (default: all ones)")
    p.add_argument("--runs", type=int, default=DEFAULT_MC_RUNS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hard", action="store_true", help="exactly C samples per run instead of Bernoulli sampling")
    _add_output_options(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("fixed-point", help="large-depth limit of the full-reward probability")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--b", type=int, required=True)
    _add_output_options(p)
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("sweep", help="parameter sweep from a JSON config")
    p.add_argument("--config", required=True)
    _add_output_options(p, xlsx=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("loss-map", help="heuristic loss against the optimal b from a JSON config")
    p.add_argument("--config", required=True)
    _add_output_options(p, xlsx=True)
    p.set_defaults(func=cmd_loss_map)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    if args.command == "mc" and args.d is None and args.q is None:
        print("error: mc needs --d or --q", file=sys.stderr)
        return EXIT_INVALID

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            table = args.func(args)
    except InfeasibleCapacityError as e:
        print(f"error: infeasible capacity: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as e:
        print(f"error: did not converge: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (ValueError, OverflowError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return exit_code_for(table)


if __name__ == "__main__":
    sys.exit(main())
