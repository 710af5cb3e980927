"""Dense linear-algebra kernel.

Vectors are 1-D float64 numpy arrays, matrices are square 2-D float64
numpy arrays.  Everything here is a pure function: inputs are never
mutated and results are freshly allocated, so values can be shared
freely across threads.

Problem sizes of interest are small (n <= a few hundred), so storage is
dense and row-major throughout; there is no sparse path.
"""

import numpy as np

__all__ = [
    "SingularMatrixError",
    "as_vector",
    "as_matrix",
    "matvec",
    "matvec_transpose",
    "dot",
    "norm2",
    "is_finite",
    "direct_solve",
]

# A pivot this small relative to the largest entry of the matrix means the
# elimination cannot be trusted; fail loudly instead of returning garbage.
PIVOT_RTOL = 1e-13


class SingularMatrixError(ValueError):
    """Raised when elimination meets a pivot that is zero to working precision."""


def as_vector(x) -> np.ndarray:
    """Coerce ``x`` to a fresh 1-D float64 array of length >= 1."""
    v = np.array(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a 1-D vector of length >= 1, got shape {v.shape}")
    return v


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a fresh square 2-D float64 array of order >= 1."""
    m = np.array(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a square matrix of order >= 1, got shape {m.shape}")
    return m


def _check_dims(a: np.ndarray, x: np.ndarray) -> None:
    if a.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: matrix of order {a.shape[0]} vs vector of length {x.shape[0]}")


def matvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``a @ x``."""
    _check_dims(a, x)
    return a @ x


def matvec_transpose(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``a.T @ y`` without materializing the transpose."""
    _check_dims(a, y)
    return a.T @ y


def dot(u: np.ndarray, v: np.ndarray) -> float:
    """Inner product of two vectors of equal length."""
    if u.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return float(np.dot(u, v))


def norm2(v: np.ndarray) -> float:
    """Euclidean norm, sqrt(dot(v, v))."""
    return float(np.sqrt(np.dot(v, v)))


def is_finite(x) -> bool:
    """True iff every entry of ``x`` is finite (no nan/inf)."""
    return bool(np.isfinite(x).all())


def direct_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting.

    This is the verification oracle the iterative solvers are checked
    against.  It raises :class:`SingularMatrixError` as soon as the best
    available pivot falls at or below ``PIVOT_RTOL`` times the largest
    entry of ``a``, rather than silently amplifying noise.
    """
    u = as_matrix(a)
    x = as_vector(b)
    n = u.shape[0]
    _check_dims(u, x)

    pivot_tol = PIVOT_RTOL * float(np.abs(u).max())
    for k in range(n):
        p = k + int(np.argmax(np.abs(u[k:, k])))
        if abs(u[p, k]) <= pivot_tol:
            raise SingularMatrixError(
                f"matrix singular to working precision: pivot {u[p, k]:.3e} in column {k} "
                f"is below tolerance {pivot_tol:.3e}"
            )
        if p != k:
            u[[k, p]] = u[[p, k]]
            x[[k, p]] = x[[p, k]]
        mult = u[k + 1:, k] / u[k, k]
        u[k + 1:, k + 1:] -= np.outer(mult, u[k, k + 1:])
        x[k + 1:] -= mult * x[k]

    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - np.dot(u[k, k + 1:], x[k + 1:])) / u[k, k]
    return x
