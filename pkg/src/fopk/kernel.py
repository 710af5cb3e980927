"""Moment functional and recurrence-coefficient machinery.

The iterative solvers in :mod:`fopk.solvers` are driven by a linear
functional ``c`` defined by the moments ``c_i = (y, A^i r0)``.  This
module computes those moments, the Hankel determinant diagnostic whose
vanishing predicts breakdown, and the scalar coefficients of the
three-term recurrences behind the A12 and A8/B10 solvers.

Every division in a recurrence is guarded: a denominator ``d`` with
``|d| <= tol * max(1, |numerator|)`` raises :class:`Breakdown` carrying
a typed :class:`BreakdownKind`, so callers always learn *which* scalar
went to zero instead of meeting a NaN downstream.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .linalg import dot, matvec, norm2

__all__ = [
    "DEFAULT_BREAKDOWN_TOL",
    "BreakdownVariant",
    "BreakdownKind",
    "Breakdown",
    "MomentSequence",
    "A12Coefficients",
    "A8B10Coefficients",
    "moments",
    "hankel_det",
    "a12_coefficients",
    "a8_step_coefficient",
    "b10_step_coefficients",
]

DEFAULT_BREAKDOWN_TOL = 1e-13


class BreakdownVariant(enum.Enum):
    """What kind of scalar degenerated."""

    PIVOT_DENOMINATOR = "pivot_denominator"
    DELTA_ZERO = "delta_zero"
    NORMALIZATION_ZERO = "normalization_zero"
    INIT_MOMENT_ZERO = "init_moment_zero"
    NON_FINITE = "non_finite"


@dataclass(frozen=True)
class BreakdownKind:
    """Typed breakdown cause: variant plus the offending denominator's name.

    ``name`` uses the recurrence's own notation, e.g. ``"a13"``,
    ``"(y_k, A z_k)"``, ``"c1"``, ``"delta"``, ``"C+G"``.
    """

    variant: BreakdownVariant
    name: str = ""

    def __str__(self) -> str:
        if self.name:
            return f"{self.variant.value}({self.name})"
        return self.variant.value


class Breakdown(Exception):
    """Recurrence breakdown: a denominator vanished to working precision."""

    def __init__(self, kind: BreakdownKind, detail: str = ""):
        self.kind = kind
        msg = f"breakdown: {kind}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def _near_zero(denominator: float, tol: float, *scales: float) -> bool:
    """Breakdown test: |d| <= tol * max(|scales|).

    ``scales`` are the magnitudes the denominator is meaningless below:
    the numerator it will divide (so the ratio would exceed 1/tol) and
    the terms the denominator was computed from (so it is cancellation
    noise).  A denominator that is merely small in absolute terms, with
    proportionally small numerators, is *not* a breakdown; such ratios
    stay well conditioned on problems whose moments decay.
    """
    scale = max(abs(v) for v in scales) if scales else 1.0
    return not math.isfinite(denominator) or abs(denominator) <= tol * scale


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Moments ``values[i] = (y, A^i r0)`` together with their defining triple."""

    values: np.ndarray
    a: np.ndarray
    y: np.ndarray
    r0: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])


@dataclass(frozen=True)
class A12Coefficients:
    """Coefficients of one A12 step, plus the Cramer-system entries behind them.

    The 3x3 system aliases ``a22 = a11`` and ``a32 = a21``.  ``A`` is the
    normalization ``1 / (C + G)``, so ``A * (C + G) == 1`` up to one
    rounding of the reciprocal.
    """

    a11: float
    a13: float
    a21: float
    a23: float
    a31: float
    a33: float
    s: float
    t: float
    F: float
    b1: float
    b2: float
    b3: float
    delta_k: float
    B: float
    C: float
    G: float
    A: float

    @property
    def a22(self) -> float:
        return self.a11

    @property
    def a32(self) -> float:
        return self.a21


@dataclass(frozen=True)
class A8B10Coefficients:
    """Step coefficients of the combined A8/B10 recurrence pair.

    ``C1 = 1 / A`` by construction, so ``C1 * A == 1`` up to one rounding
    of the reciprocal.
    """

    A: float
    B1: float
    C1: float


def moments(a: np.ndarray, y: np.ndarray, r0: np.ndarray, m: int) -> MomentSequence:
    """Compute ``c_0 .. c_m`` with ``c_i = (y, A^i r0)``.

    Powers of ``A`` are never formed; the sequence is built by repeated
    matrix-vector products.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    values = np.empty(m + 1)
    v = np.asarray(r0, dtype=np.float64)
    for i in range(m + 1):
        values[i] = dot(y, v)
        if i < m:
            v = matvec(a, v)
    return MomentSequence(values=values, a=a, y=y, r0=r0)


def hankel_det(c, k: int) -> float:
    """Determinant of the k-by-k Hankel matrix with entries ``c[i+j+1]``.

    A zero value means the degree-k residual polynomial does not exist,
    which is the root cause of solver breakdown; this is a diagnostic
    used by tests, not by the solvers themselves.

    k = 1 and k = 2 use the closed forms ``c1`` and ``c1*c3 - c2*c2`` so
    the k = 2 value is bit-identical to the ``delta`` computed during
    solver initialization.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    values = c.values if isinstance(c, MomentSequence) else np.asarray(c, dtype=np.float64)
    if len(values) < 2 * k:
        raise ValueError(f"insufficient moments: need indices up to {2 * k - 1}, have {len(values) - 1}")
    if k == 1:
        return float(values[1])
    if k == 2:
        return float(values[1] * values[3] - values[2] * values[2])
    h = np.empty((k, k))
    for i in range(k):
        h[i] = values[1 + i : 1 + i + k]
    return float(np.linalg.det(h))


def a12_coefficients(
    a11: float,
    a13: float,
    a21: float,
    a23: float,
    a31: float,
    a33: float,
    s: float,
    t: float,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> A12Coefficients:
    """Solve the 3x3 Cramer system of one A12 step.

    Evaluates, in order: ``F = -a11/a13``, the right-hand sides
    ``b1 = -a21 - F*a23``, ``b2 = -a31 - F*a33``, ``b3 = -s - F*t``, the
    determinant ``delta_k`` (with ``a22 = a11``, ``a32 = a21``), then
    ``B``, ``G``, ``C`` by explicit back-substitution and the
    normalization ``A = 1/(C + G)``.  The closed forms are kept exactly
    in this arithmetic order rather than handed to a generic solver.

    Raises
    ------
    Breakdown
        With kind ``pivot_denominator("a13")``, ``delta_zero``,
        ``normalization_zero`` or ``non_finite`` depending on which
        scalar degenerates.
    """
    if not all(math.isfinite(v) for v in (a11, a13, a21, a23, a31, a33, s, t)):
        raise Breakdown(BreakdownKind(BreakdownVariant.NON_FINITE), "non-finite inner product")
    if _near_zero(a13, breakdown_tol, a11):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.PIVOT_DENOMINATOR, "a13"),
            f"a13={a13:.3e} against a11={a11:.3e}",
        )
    F = -a11 / a13

    a22 = a11
    a32 = a21
    b1 = -a21 - F * a23
    b2 = -a31 - F * a33
    b3 = -s - F * t

    minor1 = a22 * a33 - a32 * a23
    minor2 = a21 * a32 - a31 * a22
    delta_k = a11 * minor1 + a13 * minor2
    b_num = b1 * minor1 + a13 * (b2 * a32 - b3 * a22)
    # Breakdown when delta is cancellation noise relative to its own
    # terms, or so small the solved coefficient would blow up.
    if _near_zero(delta_k, breakdown_tol, b_num, abs(a11 * minor1) + abs(a13 * minor2)):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.DELTA_ZERO, "Delta_k"),
            f"Delta_k={delta_k:.3e}",
        )
    B = b_num / delta_k
    G = (b1 - a11 * B) / a13
    C = (b2 - a21 * B - a23 * G) / a22

    if not all(math.isfinite(v) for v in (F, b1, b2, b3, delta_k, B, G, C)):
        raise Breakdown(BreakdownKind(BreakdownVariant.NON_FINITE), "non-finite coefficient")
    if _near_zero(C + G, breakdown_tol, 1.0, C, G):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.NORMALIZATION_ZERO, "C+G"),
            f"C+G={C + G:.3e}",
        )
    A = 1.0 / (C + G)
    return A12Coefficients(
        a11=a11, a13=a13, a21=a21, a23=a23, a31=a31, a33=a33,
        s=s, t=t, F=F, b1=b1, b2=b2, b3=b3, delta_k=delta_k,
        B=B, C=C, G=G, A=A,
    )


def a8_step_coefficient(
    yk: np.ndarray,
    rk: np.ndarray,
    azk: np.ndarray,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> float:
    """Step scalar ``-(y_k, r_k) / (y_k, A z_k)`` of the A8 relation."""
    num = dot(yk, rk)
    den = dot(yk, azk)
    if not (math.isfinite(num) and math.isfinite(den)):
        raise Breakdown(BreakdownKind(BreakdownVariant.NON_FINITE), "non-finite inner product")
    if _near_zero(den, breakdown_tol, num, norm2(yk) * norm2(azk)):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.PIVOT_DENOMINATOR, "(y_k, A z_k)"),
            f"(y_k, A z_k)={den:.3e} against (y_k, r_k)={num:.3e}",
        )
    return -num / den


def b10_step_coefficients(
    a_next: float,
    yk1: np.ndarray,
    rk1: np.ndarray,
    yk: np.ndarray,
    azk: np.ndarray,
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
) -> A8B10Coefficients:
    """Auxiliary-direction coefficients ``C1 = 1/a_next`` and
    ``B1 = -C1 (y_{k+1}, r_{k+1}) / (y_k, A z_k)`` of the B10 relation."""
    if _near_zero(a_next, breakdown_tol, 1.0):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.PIVOT_DENOMINATOR, "A_{k+1}"),
            f"A_{{k+1}}={a_next:.3e}",
        )
    C1 = 1.0 / a_next
    num = C1 * dot(yk1, rk1)
    den = dot(yk, azk)
    if not (math.isfinite(num) and math.isfinite(den)):
        raise Breakdown(BreakdownKind(BreakdownVariant.NON_FINITE), "non-finite inner product")
    if _near_zero(den, breakdown_tol, num, norm2(yk) * norm2(azk)):
        raise Breakdown(
            BreakdownKind(BreakdownVariant.PIVOT_DENOMINATOR, "(y_k, A z_k)"),
            f"(y_k, A z_k)={den:.3e}",
        )
    B1 = -num / den
    if not (math.isfinite(B1) and math.isfinite(C1)):
        raise Breakdown(BreakdownKind(BreakdownVariant.NON_FINITE), "non-finite coefficient")
    return A8B10Coefficients(A=a_next, B1=B1, C1=C1)
