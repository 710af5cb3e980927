"""Command-line interface.

Two subcommands::

    fopk solve --problem {disc5|hilbert|mm:<path>} --n <int> [--delta <real>]
               --algo {a12|a8b10|fom} [--eps <real>] [--max-iter <int>]
               [--y {r0|ones|random:<seed>}] [--trace <path>]
    fopk bench --suite {table1|table2|table3|all} [--format {md|csv|json}]
               [--out <path>] [--repeats <int>]

Exit codes: 0 converged or suite complete, 2 breakdown, 3 iteration cap,
1 usage or I/O error.  The ``FOPK_SEED`` environment variable overrides
the seed of a ``random:<seed>`` shadow vector.
"""

import argparse
import sys

from .harness import DEFAULT_REPEATS, emit_table, run_suite, suite_by_name, write_trace
from .problems import MatrixMarketError, ProblemSpec, materialize
from .solvers import SOLVERS, SolveConfig, SolveStatus

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BREAKDOWN = 2
EXIT_ITERATION_CAP = 3

_FORMATS = {"md": "markdown", "csv": "csv", "json": "json"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fopk", description="Lanczos-type solver toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one problem instance")
    solve.add_argument("--problem", required=True,
                       help="disc5, hilbert, or mm:<path to Matrix Market file>")
    solve.add_argument("--n", type=int, default=0, help="problem size (generated families)")
    solve.add_argument("--delta", type=float, default=0.0, help="asymmetry parameter of disc5")
    solve.add_argument("--block-size", type=int, default=10, help="diagonal block size of disc5")
    solve.add_argument("--algo", required=True, choices=sorted(SOLVERS))
    solve.add_argument("--eps", type=float, default=1e-6, help="residual-norm stopping threshold")
    solve.add_argument("--max-iter", type=int, default=None, help="iteration cap (default 10n)")
    solve.add_argument("--y", default="r0", help="shadow vector: r0, ones or random:<seed>")
    solve.add_argument("--trace", default=None, help="write per-iteration csv trace here")

    bench = sub.add_parser("bench", help="run a benchmark suite")
    bench.add_argument("--suite", required=True, choices=["table1", "table2", "table3", "all"])
    bench.add_argument("--format", default="md", choices=sorted(_FORMATS))
    bench.add_argument("--out", default=None, help="write the report here instead of stdout")
    bench.add_argument("--repeats", type=int, default=DEFAULT_REPEATS)
    return parser


def _problem_spec(args) -> ProblemSpec:
    if args.problem == "disc5":
        return ProblemSpec("disc5", n=args.n, delta=args.delta, block_size=args.block_size)
    if args.problem == "hilbert":
        return ProblemSpec("hilbert", n=args.n)
    if args.problem.startswith("mm:"):
        return ProblemSpec("mm", path=args.problem[3:])
    raise ValueError(f"unknown problem {args.problem!r} (expected disc5, hilbert or mm:<path>)")


def _cmd_solve(args) -> int:
    problem = materialize(_problem_spec(args))
    cfg = SolveConfig(
        epsilon=args.eps,
        max_iter=args.max_iter,
        y_choice=args.y,
        record_trace=args.trace is not None,
    )
    outcome = SOLVERS[args.algo](problem.a, problem.b, None, cfg)
    if args.trace is not None:
        write_trace(outcome, args.trace)
    n = problem.a.shape[0]
    print(f"problem:   {problem.spec.label() if problem.spec else f'n={n}'}")
    print(f"algorithm: {args.algo}")
    print(f"status:    {outcome.status_label()}")
    print(f"iterations: {outcome.iterations}")
    print(f"recursive ||r||: {outcome.recursive_residual_norm:.6e}")
    print(f"true ||b-Ax||:   {outcome.true_residual_norm:.6e}")
    if outcome.status is SolveStatus.CONVERGED:
        return EXIT_OK
    if outcome.status is SolveStatus.BREAKDOWN:
        return EXIT_BREAKDOWN
    return EXIT_ITERATION_CAP


def _cmd_bench(args) -> int:
    names = ["table1", "table2", "table3"] if args.suite == "all" else [args.suite]
    records = []
    for name in names:
        records.extend(run_suite(suite_by_name(name), repeats=args.repeats))
    text = emit_table(records, _FORMATS[args.format])
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_bench(args)
    except (ValueError, MatrixMarketError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
