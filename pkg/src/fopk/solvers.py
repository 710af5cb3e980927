"""Iterative linear solvers behind a common contract.

Three methods share the same call shape and outcome type:

``solve_a12``
    Lanczos-type method whose residual polynomial follows a three-term
    recurrence over degrees k-2 and k-3, with a quadratic and a linear
    coefficient polynomial.  More work per step than classic variants,
    in exchange for markedly fewer breakdowns.
``solve_a8_b10``
    Classic Lanczos-type method combining a one-step residual update
    with an auxiliary direction sequence.
``solve_arnoldi_fom``
    Full orthogonalization method on an Arnoldi basis built by modified
    Gram-Schmidt; the robust (and more expensive) reference.

All solvers terminate with a structured :class:`SolveOutcome`: converged,
typed breakdown, or iteration cap.  A breakdown outcome carries the last
finite iterate, never NaN.
"""

import os
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np

from .kernel import (
    DEFAULT_BREAKDOWN_TOL,
    Breakdown,
    BreakdownKind,
    BreakdownVariant,
    a8_step_coefficient,
    a12_coefficients,
    b10_step_coefficients,
)
from .linalg import SingularMatrixError, as_matrix, as_vector, direct_solve, dot, is_finite, norm2

__all__ = [
    "SolveConfig",
    "SolveStatus",
    "SolveOutcome",
    "TraceEntry",
    "resolve_y",
    "true_residual",
    "solve_a12",
    "solve_a8_b10",
    "solve_arnoldi_fom",
    "SOLVERS",
]

# Iterates larger than this are numerically meaningless; treating them as
# non-finite keeps every reported quantity representable.
GROWTH_LIMIT = 1e100

IterateHook = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class SolveConfig:
    """Knobs shared by all solvers.

    ``y_choice`` selects the shadow vector: ``"r0"`` (copy of the initial
    residual), ``"ones"``, or ``"random:<seed>"`` (standard normal; the
    ``FOPK_SEED`` environment variable overrides the seed).  ``max_iter``
    of ``None`` means ten times the problem dimension.
    """

    epsilon: float = 1e-6
    max_iter: int | None = None
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL
    y_choice: str = "r0"
    record_trace: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.breakdown_tol > 0:
            raise ValueError("breakdown_tol must be > 0")
        _parse_y_choice(self.y_choice)

    def resolved_max_iter(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else 10 * n


class SolveStatus(Enum):
    CONVERGED = "converged"
    BREAKDOWN = "breakdown"
    ITERATION_CAP = "iteration_cap"


class TraceEntry(NamedTuple):
    k: int
    recursive_rnorm: float
    true_rnorm: float


@dataclass
class SolveOutcome:
    """Terminal state of one solve.

    ``x`` is always finite: on breakdown it is the last finite iterate.
    ``recursive_residual_norm`` is the recurrence-propagated norm,
    ``true_residual_norm`` is ``||b - A x||`` recomputed at the end.
    ``trace`` (when recorded) holds one entry per accepted iterate,
    including the initialization iterates.
    """

    status: SolveStatus
    x: np.ndarray
    recursive_residual_norm: float
    true_residual_norm: float
    iterations: int
    trace: list[TraceEntry] | None = None
    breakdown: BreakdownKind | None = None

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def status_label(self) -> str:
        if self.status is SolveStatus.BREAKDOWN:
            return f"breakdown({self.breakdown})"
        return self.status.value


def _parse_y_choice(choice: str):
    if choice in ("r0", "ones"):
        return choice, None
    if choice.startswith("random:"):
        try:
            return "random", int(choice.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad seed in y_choice {choice!r}") from None
    raise ValueError(f"y_choice must be 'r0', 'ones' or 'random:<seed>', got {choice!r}")


def resolve_y(y_choice: str, r0: np.ndarray) -> np.ndarray:
    """Materialize the shadow vector for a given initial residual."""
    mode, seed = _parse_y_choice(y_choice)
    if mode == "r0":
        y = r0.copy()
    elif mode == "ones":
        y = np.ones_like(r0)
    else:
        env = os.environ.get("FOPK_SEED")
        if env is not None:
            seed = int(env)
        y = np.random.default_rng(seed).standard_normal(r0.shape[0])
    if norm2(y) == 0.0:
        raise ValueError("shadow vector y must be nonzero")
    return y


def true_residual(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Recompute ``b - A x`` from scratch."""
    if a.shape[1] != x.shape[0] or a.shape[0] != b.shape[0]:
        raise ValueError("dimension mismatch in true_residual")
    return b - a @ x


def _finite_iterate(v: np.ndarray) -> bool:
    return is_finite(v) and float(np.abs(v).max()) < GROWTH_LIMIT


def _setup(a, b, x0, cfg):
    a = as_matrix(a)
    b = as_vector(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix order {n} vs rhs length {b.shape[0]}")
    x0 = np.zeros(n) if x0 is None else as_vector(x0)
    if x0.shape[0] != n:
        raise ValueError(f"dimension mismatch: matrix order {n} vs x0 length {x0.shape[0]}")
    cfg = cfg if cfg is not None else SolveConfig()
    if not (is_finite(a) and is_finite(b) and is_finite(x0)):
        raise ValueError("inputs must be finite")
    return a, b, x0, cfg, n


class _Monitor:
    """Per-solve bookkeeping: trace rows, hook calls, outcome assembly."""

    def __init__(self, a, b, cfg, hook: IterateHook | None):
        self.a = a
        self.b = b
        self.epsilon = cfg.epsilon
        self.trace = [] if cfg.record_trace else None
        self.hook = hook
        self.k = 0
        self.x = None
        self.rnorm = np.inf

    @property
    def observing(self) -> bool:
        return self.trace is not None or self.hook is not None

    def accept(self, k: int, r: np.ndarray | None, x: np.ndarray, rnorm: float,
               r_is_true: bool = False):
        """Register iterate k (already checked finite).

        ``r`` may be None when nothing observes the run; ``r_is_true``
        marks it as an already recomputed ``b - A x`` so the trace does
        not recompute it.
        """
        self.k = k
        self.x = x
        self.rnorm = rnorm
        if not self.observing:
            return
        if k == 0:
            tnorm = rnorm
        elif r_is_true and r is not None:
            tnorm = norm2(r)
        else:
            tnorm = norm2(true_residual(self.a, self.b, x))
        if self.trace is not None:
            self.trace.append(TraceEntry(k, rnorm, tnorm))
        if self.hook is not None:
            self.hook(k, r, x)

    def finish(self, status: SolveStatus, kind: BreakdownKind | None = None) -> SolveOutcome:
        return SolveOutcome(
            status=status,
            x=self.x,
            recursive_residual_norm=self.rnorm,
            true_residual_norm=norm2(true_residual(self.a, self.b, self.x)),
            iterations=self.k,
            trace=self.trace,
            breakdown=kind,
        )

    def converged(self) -> SolveOutcome:
        return self.finish(SolveStatus.CONVERGED)

    def broke(self, kind: BreakdownKind) -> SolveOutcome:
        return self.finish(SolveStatus.BREAKDOWN, kind)

    def capped(self) -> SolveOutcome:
        return self.finish(SolveStatus.ITERATION_CAP)


@dataclass
class A12InitState:
    """State handed from initialization to the k >= 3 recurrence loop."""

    rs: list[np.ndarray]  # [r0, r1, r2]
    xs: list[np.ndarray]  # [x0, x1, x2]
    ys: list[np.ndarray]  # [y0, y1, y2, y3]


def a12_init(a, b, x0, y, cfg, _mon: _Monitor | None = None):
    """Degree-1 and degree-2 initialization of the A12 solver.

    Computes the first two iterates from the closed forms of the low
    degree residual polynomials and the moments c0..c3 of the shadow
    vector, checking for convergence after each of r0, r1, r2 before
    the next denominator is used.

    ``y`` of None derives the shadow vector from ``cfg.y_choice`` once
    r0 is known to be nonzero.

    Returns an :class:`A12InitState` ready for the main loop, or an
    early :class:`SolveOutcome` (converged at an initialization iterate,
    a moment-zero breakdown, or an iteration cap of 1 or 2).
    """
    a, b, x0, cfg, n = _setup(a, b, x0, cfg)
    mon = _mon if _mon is not None else _Monitor(a, b, cfg, None)
    max_iter = cfg.resolved_max_iter(n)
    tol = cfg.breakdown_tol

    r0 = b - a @ x0
    if not _finite_iterate(r0):
        raise ValueError("initial residual is not finite")
    mon.accept(0, r0, x0.copy(), norm2(r0))
    if mon.rnorm <= cfg.epsilon:
        return mon.converged()

    y0 = resolve_y(cfg.y_choice, r0) if y is None else as_vector(y)
    if y0.shape[0] != n:
        raise ValueError("dimension mismatch for shadow vector y")
    if norm2(y0) == 0.0:
        raise ValueError("shadow vector y must be nonzero")

    p = a @ r0
    p1 = a @ p
    c0 = dot(y0, r0)
    c1 = dot(y0, p)
    # c1 counts as zero when it is cancellation noise (y numerically
    # orthogonal to A r0) or small enough that c0/c1 blows up.
    if abs(c1) <= tol * max(abs(c0), norm2(y0) * norm2(p)):
        return mon.broke(BreakdownKind(BreakdownVariant.INIT_MOMENT_ZERO, "c1"))
    r1 = r0 - (c0 / c1) * p
    x1 = x0 + (c0 / c1) * r0
    if not (_finite_iterate(r1) and _finite_iterate(x1)):
        return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
    mon.accept(1, r1, x1, norm2(r1))
    if mon.rnorm <= cfg.epsilon:
        return mon.converged()
    if max_iter < 2:
        return mon.capped()

    c2 = dot(y0, p1)
    c3 = dot(y0, a @ p1)
    delta = c1 * c3 - c2 * c2
    alpha_num = c0 * c3 - c1 * c2
    beta_num = c0 * c2 - c1 * c1
    if abs(delta) <= tol * max(abs(alpha_num), abs(beta_num), abs(c1 * c3) + abs(c2 * c2)):
        return mon.broke(BreakdownKind(BreakdownVariant.INIT_MOMENT_ZERO, "delta"))
    alpha = alpha_num / delta
    beta = beta_num / delta
    r2 = r0 - alpha * p + beta * p1
    x2 = x0 + alpha * r0 - beta * p
    if not (_finite_iterate(r2) and _finite_iterate(x2)):
        return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
    mon.accept(2, r2, x2, norm2(r2))
    if mon.rnorm <= cfg.epsilon:
        return mon.converged()
    if max_iter < 3:
        return mon.capped()

    y1 = a.T @ y0
    y2 = a.T @ y1
    y3 = a.T @ y2
    if not (is_finite(y1) and is_finite(y2) and is_finite(y3)):
        return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
    return A12InitState(rs=[r0, r1, r2], xs=[x0.copy(), x1, x2], ys=[y0, y1, y2, y3])


def solve_a12(a, b, x0=None, cfg: SolveConfig | None = None,
              iterate_hook: IterateHook | None = None) -> SolveOutcome:
    """Solve ``A x = b`` with the A12 recurrence.

    Each step k >= 3 forms the new residual from the residuals of steps
    k-2 and k-3, with coefficients obtained from a 3x3 Cramer system of
    moment inner products; a vanishing denominator anywhere surfaces as
    a typed breakdown outcome instead of NaN.
    """
    a, b, x0, cfg, n = _setup(a, b, x0, cfg)
    mon = _Monitor(a, b, cfg, iterate_hook)
    max_iter = cfg.resolved_max_iter(n)

    state = a12_init(a, b, x0, None, cfg, _mon=mon)
    if isinstance(state, SolveOutcome):
        return state

    rs = deque(state.rs, maxlen=3)   # r_{k-3}, r_{k-2}, r_{k-1}
    xs = deque(state.xs, maxlen=3)
    ys = deque(state.ys, maxlen=4)   # y_{k-3} .. y_k

    for k in range(3, max_iter + 1):
        y_next = a.T @ ys[-1]
        q1 = a @ rs[1]               # A r_{k-2}
        q2 = a @ q1                  # A^2 r_{k-2}
        q3 = a @ rs[0]               # A r_{k-3}
        a11 = dot(ys[1], rs[1])
        a13 = dot(ys[0], rs[0])
        a21 = dot(ys[2], rs[1])
        a23 = dot(ys[1], rs[0])
        a31 = dot(ys[3], rs[1])
        a33 = dot(ys[2], rs[0])
        s = dot(y_next, rs[1])
        t = dot(ys[3], rs[0])
        try:
            co = a12_coefficients(a11, a13, a21, a23, a31, a33, s, t, cfg.breakdown_tol)
        except Breakdown as exc:
            return mon.broke(exc.kind)
        rk = co.A * (q2 + co.B * q1 + co.C * rs[1] + co.F * q3 + co.G * rs[0])
        xk = co.A * (co.C * xs[1] + co.G * xs[0] - (q1 + co.B * rs[1] + co.F * rs[0]))
        if not (_finite_iterate(rk) and _finite_iterate(xk)):
            return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
        mon.accept(k, rk, xk, norm2(rk))
        rs.append(rk)
        xs.append(xk)
        ys.append(y_next)
        if mon.rnorm < cfg.epsilon:
            return mon.converged()
    return mon.capped()


def solve_a8_b10(a, b, x0=None, cfg: SolveConfig | None = None,
                 iterate_hook: IterateHook | None = None) -> SolveOutcome:
    """Solve ``A x = b`` with the A8/B10 pair of recurrences.

    One residual update and one auxiliary-direction update per step;
    cheap but breakdown-prone, which is exactly the behaviour the
    harness is built to expose.
    """
    a, b, x0, cfg, n = _setup(a, b, x0, cfg)
    mon = _Monitor(a, b, cfg, iterate_hook)
    max_iter = cfg.resolved_max_iter(n)

    rk = b - a @ x0
    if not _finite_iterate(rk):
        raise ValueError("initial residual is not finite")
    mon.accept(0, rk, x0.copy(), norm2(rk))
    if mon.rnorm <= cfg.epsilon:
        return mon.converged()

    yk = resolve_y(cfg.y_choice, rk)
    zk = rk.copy()
    xk = x0.copy()

    for k in range(max_iter):
        azk = a @ zk
        if not is_finite(azk):
            return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
        try:
            a_next = a8_step_coefficient(yk, rk, azk, cfg.breakdown_tol)
        except Breakdown as exc:
            return mon.broke(exc.kind)
        r_next = rk + a_next * azk
        x_next = xk - a_next * zk
        if not (_finite_iterate(r_next) and _finite_iterate(x_next)):
            return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
        rk, xk = r_next, x_next
        mon.accept(k + 1, rk, xk, norm2(rk))
        if mon.rnorm < cfg.epsilon:
            return mon.converged()

        y_next = a.T @ yk
        try:
            co = b10_step_coefficients(a_next, y_next, rk, yk, azk, cfg.breakdown_tol)
        except Breakdown as exc:
            return mon.broke(exc.kind)
        zk = co.B1 * zk + co.C1 * rk
        if not _finite_iterate(zk):
            return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))
        yk = y_next
    return mon.capped()


def solve_arnoldi_fom(a, b, x0=None, cfg: SolveConfig | None = None,
                      iterate_hook: IterateHook | None = None,
                      basis_hook: Callable[[int, np.ndarray], None] | None = None) -> SolveOutcome:
    """Solve ``A x = b`` with the full orthogonalization method.

    Builds an orthonormal Krylov basis by modified Gram-Schmidt (no
    reorthogonalization) and imposes the Galerkin condition through the
    small Hessenberg system at every step.  A vanishing candidate basis
    vector is the happy breakdown: converged if the residual is already
    small, a non-finite-guard breakdown otherwise.
    """
    a, b, x0, cfg, n = _setup(a, b, x0, cfg)
    mon = _Monitor(a, b, cfg, iterate_hook)
    max_steps = min(n, cfg.resolved_max_iter(n))

    r0 = b - a @ x0
    if not _finite_iterate(r0):
        raise ValueError("initial residual is not finite")
    beta = norm2(r0)
    mon.accept(0, r0, x0.copy(), beta)
    if beta <= cfg.epsilon:
        return mon.converged()

    v = np.zeros((n, max_steps + 1))
    h = np.zeros((max_steps + 1, max_steps))
    v[:, 0] = r0 / beta
    if basis_hook is not None:
        basis_hook(0, v[:, 0].copy())

    for j in range(1, max_steps + 1):
        w = a @ v[:, j - 1]
        w_scale = norm2(w)
        for i in range(j):
            h[i, j - 1] = dot(v[:, i], w)
            w = w - h[i, j - 1] * v[:, i]
        h_next = norm2(w)
        happy = h_next <= cfg.breakdown_tol * max(1.0, w_scale)

        # Galerkin iterate from the leading j-by-j Hessenberg block; a
        # singular block means the iterate does not exist at this step.
        rhs = np.zeros(j)
        rhs[0] = beta
        try:
            yj = direct_solve(h[:j, :j], rhs)
        except SingularMatrixError:
            yj = None
        if yj is not None:
            xj = x0 + v[:, :j] @ yj
            estimate = h_next * abs(yj[-1])
            if _finite_iterate(xj) and np.isfinite(estimate):
                rj = true_residual(a, b, xj) if mon.observing else None
                mon.accept(j, rj, xj, estimate, r_is_true=True)
                if mon.rnorm < cfg.epsilon:
                    return mon.converged()
            elif happy:
                return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))

        if happy:
            # Exhausted (numerically invariant) Krylov subspace.
            if norm2(true_residual(a, b, mon.x)) <= cfg.epsilon:
                return mon.converged()
            return mon.broke(BreakdownKind(BreakdownVariant.NON_FINITE))

        h[j, j - 1] = h_next
        v[:, j] = w / h_next
        if basis_hook is not None:
            basis_hook(j, v[:, j].copy())
    return mon.capped()


SOLVERS = {
    "a12": solve_a12,
    "a8b10": solve_a8_b10,
    "fom": solve_arnoldi_fom,
}
