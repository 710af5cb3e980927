"""Test-problem generators and external matrix ingestion.

Two built-in families:

* a block-tridiagonal matrix of the kind produced by the 5-point
  discretisation of a convection-diffusion operator, with off-center
  tridiagonal entries ``-1 + delta`` / ``-1 - delta`` controlling how
  far from symmetric the matrix is;
* the Hilbert matrix, the classic ill-conditioned stress test.

Both use the all-ones vector as the known solution and build the right
hand side as ``b = A x_true``, so every generated problem carries its
exact answer.  External matrices come in through a small Matrix Market
reader (array and coordinate layouts, real entries, general or
symmetric).
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, matvec

__all__ = [
    "ProblemSpec",
    "Problem",
    "MatrixMarketError",
    "gen_disc5point",
    "gen_hilbert",
    "load_matrix_market",
    "make_rhs_ones",
    "materialize",
]

DEFAULT_BLOCK_SIZE = 10


@dataclass(frozen=True)
class ProblemSpec:
    """Declarative description of a problem instance.

    ``family`` is ``"disc5"``, ``"hilbert"`` or ``"mm"``; ``n`` and
    ``delta`` apply to the generated families, ``path`` to ``"mm"``.
    """

    family: str
    n: int = 0
    delta: float = 0.0
    path: str = ""
    block_size: int = DEFAULT_BLOCK_SIZE

    def label(self) -> str:
        if self.family == "disc5":
            return f"disc5(n={self.n}, delta={self.delta:g})"
        if self.family == "hilbert":
            return f"hilbert(n={self.n})"
        return f"mm({self.path})"


@dataclass
class Problem:
    """Materialized system: matrix, right-hand side and (when known) the
    exact solution used to build it."""

    a: np.ndarray
    b: np.ndarray
    x_true: np.ndarray | None = None
    spec: ProblemSpec | None = None


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input; message carries the line number."""


def gen_disc5point(n: int, delta: float, block_size: int = DEFAULT_BLOCK_SIZE) -> Problem:
    """Block-tridiagonal test matrix with ``-I`` coupling blocks.

    Each diagonal block is tridiagonal with 4 on the diagonal,
    ``-1 + delta`` above it and ``-1 - delta`` below it.  ``n`` must be
    a multiple of ``block_size``.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    if n < block_size or n % block_size != 0:
        raise ValueError(f"n={n} must be a positive multiple of block_size={block_size}")
    alpha = -1.0 + delta
    beta = -1.0 - delta
    a = np.zeros((n, n))
    for start in range(0, n, block_size):
        sl = slice(start, start + block_size)
        block = a[sl, sl]
        np.fill_diagonal(block, 4.0)
        np.fill_diagonal(block[:-1, 1:], alpha)
        np.fill_diagonal(block[1:, :-1], beta)
        if start + block_size < n:
            off = slice(start + block_size, start + 2 * block_size)
            np.fill_diagonal(a[sl, off], -1.0)
            np.fill_diagonal(a[off, sl], -1.0)
    b, x_true = make_rhs_ones(a)
    return Problem(a=a, b=b, x_true=x_true, spec=ProblemSpec("disc5", n=n, delta=delta, block_size=block_size))


def gen_hilbert(n: int) -> Problem:
    """Hilbert matrix ``a[i, j] = 1 / (i + j + 1)`` with the all-ones solution."""
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n)
    a = 1.0 / (idx[:, None] + idx[None, :] + 1.0)
    b, x_true = make_rhs_ones(a)
    return Problem(a=a, b=b, x_true=x_true, spec=ProblemSpec("hilbert", n=n))


def make_rhs_ones(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side with the all-ones vector as exact solution."""
    a = as_matrix(a)
    x_true = np.ones(a.shape[0])
    return matvec(a, x_true), x_true


def load_matrix_market(path: str) -> np.ndarray:
    """Read a square dense matrix from a Matrix Market file.

    Supports the ``array`` and ``coordinate`` layouts with ``real`` (or
    ``integer``) entries and ``general`` or ``symmetric`` storage.
    Symmetric files are completed to full storage; coordinate entries
    not listed are zero.  Raises :class:`MatrixMarketError` with the
    offending line number on malformed input.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.readlines()

    def fail(lineno, msg):
        raise MatrixMarketError(f"{path}:{lineno}: {msg}")

    if not lines:
        fail(0, "empty file")
    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        fail(1, "expected header '%%MatrixMarket matrix <format> <field> <symmetry>'")
    _, obj, layout, fieldtype, symmetry = (w.lower() for w in header)
    if obj != "matrix":
        fail(1, f"unsupported object {obj!r}")
    if layout not in ("array", "coordinate"):
        fail(1, f"unsupported format {layout!r}")
    if fieldtype not in ("real", "integer"):
        fail(1, f"unsupported field type {fieldtype!r} (only real entries are handled)")
    if symmetry not in ("general", "symmetric"):
        fail(1, f"unsupported symmetry {symmetry!r}")

    # First non-comment, non-blank line after the header is the size line.
    body_start = None
    for i in range(1, len(lines)):
        stripped = lines[i].strip()
        if stripped and not stripped.startswith("%"):
            body_start = i
            break
    if body_start is None:
        fail(len(lines), "missing size line")
    size_parts = lines[body_start].split()

    def parse_int(tok, lineno, what):
        try:
            return int(tok)
        except ValueError:
            fail(lineno, f"bad {what} {tok!r}")

    if layout == "array":
        if len(size_parts) != 2:
            fail(body_start + 1, "array size line must be '<rows> <cols>'")
        rows = parse_int(size_parts[0], body_start + 1, "row count")
        cols = parse_int(size_parts[1], body_start + 1, "column count")
        if rows != cols or rows < 1:
            fail(body_start + 1, f"expected a square matrix, got {rows}x{cols}")
        n = rows
        if symmetry == "symmetric":
            wanted = n * (n + 1) // 2
        else:
            wanted = n * n
        values = []
        for i in range(body_start + 1, len(lines)):
            stripped = lines[i].strip()
            if not stripped or stripped.startswith("%"):
                continue
            for tok in stripped.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    fail(i + 1, f"bad numeric value {tok!r}")
        if len(values) != wanted:
            fail(len(lines), f"expected {wanted} array values, got {len(values)}")
        a = np.zeros((n, n))
        # Array layout lists entries column-major; symmetric files list
        # only the lower triangle of each column.
        pos = 0
        for j in range(n):
            i0 = j if symmetry == "symmetric" else 0
            for i in range(i0, n):
                a[i, j] = values[pos]
                pos += 1
        if symmetry == "symmetric":
            a = np.where(np.eye(n, dtype=bool), a, a + a.T)
        return a

    if len(size_parts) != 3:
        fail(body_start + 1, "coordinate size line must be '<rows> <cols> <nnz>'")
    rows = parse_int(size_parts[0], body_start + 1, "row count")
    cols = parse_int(size_parts[1], body_start + 1, "column count")
    nnz = parse_int(size_parts[2], body_start + 1, "entry count")
    if rows != cols or rows < 1:
        fail(body_start + 1, f"expected a square matrix, got {rows}x{cols}")
    n = rows
    a = np.zeros((n, n))
    seen = 0
    for i in range(body_start + 1, len(lines)):
        stripped = lines[i].strip()
        if not stripped or stripped.startswith("%"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            fail(i + 1, f"coordinate entry must be '<row> <col> <value>', got {stripped!r}")
        r = parse_int(parts[0], i + 1, "row index")
        c = parse_int(parts[1], i + 1, "column index")
        if not (1 <= r <= n and 1 <= c <= n):
            fail(i + 1, f"index ({r}, {c}) outside 1..{n}")
        try:
            val = float(parts[2])
        except ValueError:
            fail(i + 1, f"bad numeric value {parts[2]!r}")
        a[r - 1, c - 1] = val
        if symmetry == "symmetric" and r != c:
            a[c - 1, r - 1] = val
        seen += 1
    if seen != nnz:
        fail(len(lines), f"size line promised {nnz} entries, file has {seen}")
    return a


def materialize(spec: ProblemSpec) -> Problem:
    """Build the (A, b, x_true) triple a :class:`ProblemSpec` describes."""
    if spec.family == "disc5":
        return gen_disc5point(spec.n, spec.delta, spec.block_size)
    if spec.family == "hilbert":
        return gen_hilbert(spec.n)
    if spec.family == "mm":
        a = load_matrix_market(spec.path)
        b, x_true = make_rhs_ones(a)
        return Problem(a=a, b=b, x_true=x_true, spec=spec)
    raise ValueError(f"unknown problem family {spec.family!r}")
