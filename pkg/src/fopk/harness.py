"""Benchmark runner: suites of (problem size, algorithm) rows with
median-of-repeats timing and machine/human readable reports.

Rows never contain NaN: a solver that broke down contributes a row whose
status column names the breakdown kind and whose residual column holds
the true residual of the last finite iterate.
"""

import json
import statistics
import time
from dataclasses import dataclass, replace

from .kernel import BreakdownKind
from .linalg import norm2
from .problems import Problem, ProblemSpec, materialize
from .solvers import SOLVERS, SolveConfig, SolveOutcome, SolveStatus, true_residual

__all__ = [
    "SuiteSpec",
    "RunRecord",
    "suite_by_name",
    "run_suite",
    "emit_table",
    "write_trace",
]

TABLE_SIZES = tuple(range(10, 101, 10))
HILBERT_SIZES = tuple(range(10, 51, 10))
ALL_ALGORITHMS = ("a12", "a8b10", "fom")
DEFAULT_REPEATS = 5


@dataclass(frozen=True)
class SuiteSpec:
    """A named sweep over problem sizes and algorithms.

    The three preset suites mirror the benchmark protocol this library
    reproduces: ``table1`` (block-tridiagonal, delta 0), ``table2``
    (same family, delta 0.2, looser epsilon) and ``table3`` (Hilbert).
    ``epsilon`` here governs the runs; it overrides whatever a base
    :class:`SolveConfig` carries.
    """

    name: str = "custom"
    family: str = "disc5"
    sizes: tuple[int, ...] = TABLE_SIZES
    delta: float = 0.0
    epsilon: float = 1e-5
    algorithms: tuple[str, ...] = ALL_ALGORITHMS

    def __post_init__(self):
        if self.family not in ("disc5", "hilbert"):
            raise ValueError(f"unknown suite family {self.family!r}")
        unknown = [a for a in self.algorithms if a not in SOLVERS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}")
        if not self.sizes:
            raise ValueError("suite needs at least one size")


def suite_by_name(name: str, algorithms: tuple[str, ...] = ALL_ALGORITHMS) -> SuiteSpec:
    if name == "table1":
        return SuiteSpec(name=name, family="disc5", sizes=TABLE_SIZES, delta=0.0,
                         epsilon=1e-5, algorithms=algorithms)
    if name == "table2":
        return SuiteSpec(name=name, family="disc5", sizes=TABLE_SIZES, delta=0.2,
                         epsilon=1e-3, algorithms=algorithms)
    if name == "table3":
        return SuiteSpec(name=name, family="hilbert", sizes=HILBERT_SIZES, delta=0.0,
                         epsilon=1e-5, algorithms=algorithms)
    raise ValueError(f"unknown suite {name!r} (expected table1, table2 or table3)")


@dataclass
class RunRecord:
    """One benchmark row: a solver applied to one problem instance."""

    problem: ProblemSpec
    algorithm: str
    status: SolveStatus
    breakdown: BreakdownKind | None
    final_true_residual: float
    iterations: int
    wall_time_s: float
    repeats: int

    def status_label(self) -> str:
        if self.status is SolveStatus.BREAKDOWN:
            return f"breakdown({self.breakdown})"
        return self.status.value

    def as_dict(self) -> dict:
        return {
            "problem": self.problem.label(),
            "n": self.problem.n,
            "algo": self.algorithm,
            "status": self.status_label(),
            "residual": self.final_true_residual,
            "iters": self.iterations,
            "time_s": self.wall_time_s,
            "repeats": self.repeats,
        }


def _run_row(problem: Problem, algorithm: str, cfg: SolveConfig, repeats: int) -> RunRecord:
    solver = SOLVERS[algorithm]
    times = []
    outcome: SolveOutcome | None = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        outcome = solver(problem.a, problem.b, None, cfg)
        times.append(time.perf_counter() - t0)
    # Residual column is always recomputed from the returned iterate,
    # never trusted from the recursion.
    residual = norm2(true_residual(problem.a, problem.b, outcome.x))
    return RunRecord(
        problem=problem.spec,
        algorithm=algorithm,
        status=outcome.status,
        breakdown=outcome.breakdown,
        final_true_residual=residual,
        iterations=outcome.iterations,
        wall_time_s=statistics.median(times),
        repeats=repeats,
    )


def run_suite(suite: SuiteSpec, cfg: SolveConfig | None = None,
              repeats: int = DEFAULT_REPEATS) -> list[RunRecord]:
    """Run every (size, algorithm) pair of a suite.

    Each row solves a freshly generated problem ``repeats`` times and
    reports the median wall time.  A breakdown is a valid row, not an
    error.  Runs are deterministic unless ``cfg.y_choice`` is seeded
    randomness.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    base = cfg if cfg is not None else SolveConfig()
    run_cfg = replace(base, epsilon=suite.epsilon)
    records = []
    for n in suite.sizes:
        spec = ProblemSpec(family=suite.family, n=n, delta=suite.delta)
        problem = materialize(spec)
        for algorithm in suite.algorithms:
            records.append(_run_row(problem, algorithm, run_cfg, repeats))
    return records


def emit_table(records: list[RunRecord], fmt: str = "markdown") -> str:
    """Render records as ``markdown``, ``csv`` or ``json`` text.

    The markdown layout pivots to one row per problem size with one
    column group (residual, time, status) per algorithm; breakdown cells
    spell out the breakdown kind.
    """
    if not records:
        raise ValueError("no records to emit")
    if fmt == "csv":
        lines = ["n,algo,status,residual,iters,time_s,repeats"]
        for r in records:
            lines.append(
                f"{r.problem.n},{r.algorithm},{r.status_label()},"
                f"{r.final_true_residual:.6e},{r.iterations},{r.wall_time_s:.6f},{r.repeats}"
            )
        return "\n".join(lines) + "\n"
    if fmt == "json":
        return json.dumps([r.as_dict() for r in records], indent=2) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown format {fmt!r} (expected markdown, csv or json)")

    algorithms = []
    for r in records:
        if r.algorithm not in algorithms:
            algorithms.append(r.algorithm)
    by_key = {(r.problem.n, r.algorithm): r for r in records}
    sizes = []
    for r in records:
        if r.problem.n not in sizes:
            sizes.append(r.problem.n)

    header = ["n"]
    for algo in algorithms:
        header += [f"{algo} ||r||", f"{algo} t(s)", f"{algo} status"]
    lines = ["| " + " | ".join(header) + " |",
             "|" + "---|" * len(header)]
    for n in sizes:
        cells = [str(n)]
        for algo in algorithms:
            r = by_key.get((n, algo))
            if r is None:
                cells += ["-", "-", "-"]
            else:
                cells += [f"{r.final_true_residual:.4e}", f"{r.wall_time_s:.6f}", r.status_label()]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_trace(outcome: SolveOutcome, path: str) -> None:
    """Dump a recorded per-iteration trace as csv.

    One row per accepted iterate, initialization iterates included.
    Only norms are stored; iterates themselves are not recoverable from
    a trace file.
    """
    if outcome.trace is None:
        raise ValueError("outcome has no trace; enable record_trace in SolveConfig")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("k,recursive_rnorm,true_rnorm\n")
        for entry in outcome.trace:
            fh.write(f"{entry.k},{entry.recursive_rnorm:.17e},{entry.true_rnorm:.17e}\n")
