"""Exact rational matrices, tolerant float eigensplits, and modular rank helpers.

Exact work goes through :class:`Matrix`, a small immutable wrapper around
``flint.fmpq_mat``.  Entries come back as :class:`fractions.Fraction`.  Float
work is kept in plain numpy arrays and only ever enters through
:func:`symmetric_eigensplit` together with an explicit
:class:`ToleranceContext`; nothing converts between the two worlds silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint
import numpy as np

# A prime just below 2**31; products of two residues stay inside int64/uint64.
DEFAULT_PRIME = 2147483629


class ExactnessError(ValueError):
    """Raised when a float or otherwise inexact value reaches an exact routine."""


class ClusterAmbiguity(ArithmeticError):
    """Eigenvalue gaps fall inside the ambiguity band, so clusters cannot be split safely."""


def to_fraction(x) -> Fraction:
    """Coerce ints, ``"p/q"`` strings, Fractions and flint rationals to Fraction.

    Floats are refused: use :func:`Fraction.from_float` explicitly if that is
    really what is wanted.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise ExactnessError(f"refusing to treat {type(x).__name__} {x!r} as an exact rational")


def to_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    f = to_fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


_to_fmpq = to_fmpq


def fraction_str(x: Fraction) -> str:
    return str(to_fraction(x))


@dataclass(frozen=True)
class ToleranceContext:
    """Tolerances for float-mode computations.

    ``abs_tol`` merges eigenvalues closer than it; gaps between ``abs_tol``
    and ``separation`` are considered ambiguous.
    """

    abs_tol: float = 1e-9
    separation: float = 1e-6

    def __post_init__(self):
        if not (0 < self.abs_tol <= self.separation):
            raise ValueError("need 0 < abs_tol <= separation")


class Matrix:
    """Immutable exact rational matrix."""

    __slots__ = ("_m", "_hash")

    def __init__(self, rows: Sequence[Sequence] | "Matrix" | flint.fmpq_mat, ncols: int | None = None):
        if isinstance(rows, Matrix):
            self._m = rows._m
        elif isinstance(rows, flint.fmpq_mat):
            self._m = flint.fmpq_mat(rows)
        elif isinstance(rows, flint.fmpz_mat):
            self._m = flint.fmpq_mat(rows)
        else:
            rows = [list(r) for r in rows]
            nr = len(rows)
            nc = len(rows[0]) if nr else (ncols or 0)
            if any(len(r) != nc for r in rows):
                raise ValueError("ragged rows")
            flat = [_to_fmpq(x) for r in rows for x in r]
            self._m = flint.fmpq_mat(nr, nc, flat)
        self._hash = None

    # construction helpers
    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> "Matrix":
        ncols = nrows if ncols is None else ncols
        return cls(flint.fmpq_mat(nrows, ncols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        m = flint.fmpq_mat(n, n)
        for i in range(n):
            m[i, i] = 1
        return cls(m)

    @classmethod
    def diag(cls, entries: Iterable) -> "Matrix":
        entries = list(entries)
        m = flint.fmpq_mat(len(entries), len(entries))
        for i, e in enumerate(entries):
            m[i, i] = _to_fmpq(e)
        return cls(m)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Matrix":
        cols = [list(c) for c in cols]
        if not cols:
            raise ValueError("need at least one column")
        return cls([[c[i] for c in cols] for i in range(len(cols[0]))])

    @classmethod
    def block(cls, blocks: Sequence[Sequence["Matrix | None"]]) -> "Matrix":
        """Assemble from a grid of blocks; ``None`` means a zero block."""
        heights = []
        for brow in blocks:
            h = {b.nrows for b in brow if b is not None}
            if len(h) != 1:
                raise ValueError("block row heights disagree or are undetermined")
            heights.append(h.pop())
        widths = []
        for j in range(len(blocks[0])):
            w = {brow[j].ncols for brow in blocks if brow[j] is not None}
            if len(w) != 1:
                raise ValueError("block column widths disagree or are undetermined")
            widths.append(w.pop())
        out = flint.fmpq_mat(sum(heights), sum(widths))
        r0 = 0
        for bi, brow in enumerate(blocks):
            c0 = 0
            for bj, b in enumerate(brow):
                if b is not None:
                    for i in range(b.nrows):
                        for j in range(b.ncols):
                            out[r0 + i, c0 + j] = b._m[i, j]
                c0 += widths[bj]
            r0 += heights[bi]
        return cls(out)

    @classmethod
    def block_diag(cls, *mats: "Matrix") -> "Matrix":
        n = len(mats)
        return cls.block([[mats[i] if i == j else None for j in range(n)] for i in range(n)]) if n > 1 else mats[0]

    # basic protocol
    @property
    def nrows(self) -> int:
        return self._m.nrows()

    @property
    def ncols(self) -> int:
        return self._m.ncols()

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def flint(self) -> flint.fmpq_mat:
        return self._m

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return to_fraction(self._m[i, j])

    def row(self, i: int) -> list[Fraction]:
        return [self[i, j] for j in range(self.ncols)]

    def col(self, j: int) -> list[Fraction]:
        return [self[i, j] for i in range(self.nrows)]

    def tolist(self) -> list[list[Fraction]]:
        return [[to_fraction(x) for x in r] for r in self._m.tolist()]

    def entries(self) -> tuple[Fraction, ...]:
        return tuple(to_fraction(x) for x in self._m.entries())

    def __repr__(self) -> str:
        return f"Matrix({[[str(x) for x in r] for r in self.tolist()]})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self._m == other._m

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, tuple((x.p, x.q) for x in self._m.entries())))
        return self._hash

    # arithmetic
    def __add__(self, other: "Matrix") -> "Matrix":
        return Matrix(self._m + other._m)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return Matrix(self._m - other._m)

    def __neg__(self) -> "Matrix":
        return Matrix(-self._m)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return Matrix(self._m * other._m)

    def __mul__(self, c) -> "Matrix":
        if isinstance(c, Matrix):
            raise TypeError("use @ for matrix products")
        return Matrix(self._m * _to_fmpq(c))

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Matrix":
        return self * (1 / to_fraction(c))

    @property
    def T(self) -> "Matrix":
        return Matrix(self._m.transpose())

    def apply(self, v: Sequence) -> list[Fraction]:
        col = flint.fmpq_mat(len(v), 1, [_to_fmpq(x) for x in v])
        return [to_fraction(x) for x in (self._m * col).entries()]

    # predicates and invariants
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        return all(x == 0 for x in self._m.entries())

    def is_symmetric(self) -> bool:
        return self.is_square() and self._m == self._m.transpose()

    def is_skew(self) -> bool:
        return self.is_square() and self._m == -self._m.transpose()

    def is_identity(self) -> bool:
        return self == Matrix.identity(self.nrows) if self.is_square() else False

    def trace(self) -> Fraction:
        return sum((self[i, i] for i in range(self.nrows)), Fraction(0))

    def rank(self) -> int:
        return self._m.rank()

    def det(self) -> Fraction:
        return to_fraction(self._m.det())

    def inverse(self) -> "Matrix":
        return Matrix(self._m.inv())

    def charpoly(self) -> flint.fmpq_poly:
        return self._m.charpoly()

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix([[self._m[i, j] for j in cols] for i in rows]) if rows and cols else Matrix.zeros(len(rows), len(cols))

    def hstack(self, other: "Matrix") -> "Matrix":
        return Matrix.block([[self, other]])

    def vstack(self, other: "Matrix") -> "Matrix":
        return Matrix.block([[self], [other]])

    def rref(self) -> tuple["Matrix", list[int], int]:
        return rref(self)

    def kernel_basis(self) -> list[list[Fraction]]:
        return kernel_basis(self)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.tolist()], dtype=float).reshape(self.shape)

    # serialization
    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.tolist()]

    @classmethod
    def from_json(cls, data) -> "Matrix":
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise ValueError("matrix JSON must be a non-empty list of rows")
        if any(isinstance(x, float) for r in data for x in r):
            raise ExactnessError("matrix JSON entries must be integers or 'p/q' strings")
        return cls(data)


def rref(A: Matrix) -> tuple[Matrix, list[int], int]:
    """Reduced row echelon form (same shape as A), pivot columns and rank."""
    R, r = A.flint.rref()
    pivots = []
    for i in range(r):
        for j in range(A.ncols):
            if R[i, j] != 0:
                pivots.append(j)
                break
    return Matrix(R), pivots, r


def row_basis(A: Matrix) -> list[list[Fraction]]:
    """Nonzero rows of the reduced row echelon form."""
    R, _, r = rref(A)
    return R.tolist()[:r]


def kernel_basis(A: Matrix) -> list[list[Fraction]]:
    """Exact basis of {x : A x = 0}, one vector per free column, in column order."""
    n = A.ncols
    R, pivots, _ = rref(A)
    free = [j for j in range(n) if j not in set(pivots)]
    basis = []
    Rl = R.tolist()
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -Rl[i][f]
        basis.append(v)
    return basis


def span_basis(vectors: Sequence[Sequence]) -> list[list[Fraction]]:
    """Rref basis (as rows) of the span of the given vectors."""
    vectors = [list(v) for v in vectors]
    if not vectors:
        return []
    return row_basis(Matrix(vectors))


def vectors_rank(vectors: Sequence[Sequence]) -> int:
    vectors = [list(v) for v in vectors]
    return Matrix(vectors).rank() if vectors else 0


def in_span(v: Sequence, basis: Sequence[Sequence]) -> bool:
    if not basis:
        return all(to_fraction(x) == 0 for x in v)
    return vectors_rank(list(basis) + [list(v)]) == vectors_rank(basis)


def kron(A: Matrix, B: Matrix) -> Matrix:
    """Kronecker product, block (i, j) equal to A[i, j] * B."""
    a = A.tolist()
    b = B.tolist()
    rows = []
    for i in range(A.nrows):
        for bi in range(B.nrows):
            rows.append([a[i][j] * b[bi][bj] for j in range(A.ncols) for bj in range(B.ncols)])
    return Matrix(rows)


def cayley_orthogonal(S: Matrix) -> Matrix:
    """Rational orthogonal matrix (I - S)^-1 (I + S) from a skew matrix S."""
    if not S.is_skew():
        raise ValueError("Cayley transform needs a skew-symmetric matrix")
    I = Matrix.identity(S.nrows)
    return (I - S).inverse() @ (I + S)


def random_skew(n: int, rng: np.random.Generator, bound: int = 3) -> Matrix:
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = int(rng.integers(-bound, bound + 1))
            rows[i][j] = v
            rows[j][i] = -v
    return Matrix(rows)


def random_orthogonal(n: int, rng: np.random.Generator, bound: int = 3) -> Matrix:
    return cayley_orthogonal(random_skew(n, rng, bound))


def exact_sqrt(x) -> Fraction | None:
    """Square root of a nonnegative rational when it is rational, else None."""
    x = to_fraction(x)
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def gram_schmidt(vectors: Sequence[Sequence], inner=None) -> list[list[Fraction]]:
    """Orthogonal (not normalised) basis of the span, exact; drops dependent inputs."""
    if inner is None:
        def inner(u, v):
            return sum((a * b for a, b in zip(u, v)), Fraction(0))
    out: list[list[Fraction]] = []
    norms: list[Fraction] = []
    for v in vectors:
        w = [to_fraction(x) for x in v]
        for u, nu in zip(out, norms):
            c = inner(w, u) / nu
            if c:
                w = [a - c * b for a, b in zip(w, u)]
        nw = inner(w, w)
        if nw != 0:
            out.append(w)
            norms.append(nw)
    return out


def symmetric_eigensplit(A, tol: ToleranceContext | None = None) -> list[tuple[float, np.ndarray]]:
    """Cluster the spectrum of a symmetric matrix.

    Returns ``(eigenvalue, orthonormal basis columns)`` per cluster in
    increasing order.  Raises :class:`ClusterAmbiguity` if two consecutive
    eigenvalues are neither clearly equal nor clearly separated.
    """
    tol = tol or ToleranceContext()
    M = A.to_float() if isinstance(A, Matrix) else np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("need a square matrix")
    if not np.allclose(M, M.T, atol=tol.abs_tol):
        raise ValueError("matrix is not symmetric within tolerance")
    scale = max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    w, V = np.linalg.eigh((M + M.T) / 2)
    clusters: list[list[int]] = []
    for i in range(len(w)):
        if clusters and w[i] - w[clusters[-1][-1]] <= tol.abs_tol * scale:
            clusters[-1].append(i)
            continue
        if clusters and w[i] - w[clusters[-1][-1]] < tol.separation * scale:
            raise ClusterAmbiguity(
                f"gap {w[i] - w[clusters[-1][-1]]:.3e} between eigenvalues lies in the ambiguity band"
            )
        clusters.append([i])
    return [(float(np.mean(w[c])), V[:, c]) for c in clusters]


# modular and integer linear algebra for large systems

def clear_denominators(v: Sequence) -> list[int]:
    """Smallest integer multiple of a rational vector (content not removed)."""
    fr = [to_fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return [int(x * den) for x in fr]


def primitive_integer(v: Sequence) -> list[int]:
    iv = clear_denominators(v)
    g = 0
    for x in iv:
        g = math.gcd(g, x)
    return [x // g for x in iv] if g > 1 else iv


def rank_mod_p(rows: np.ndarray | Sequence[Sequence[int]], p: int = DEFAULT_PRIME) -> int:
    """Rank over GF(p) of an integer matrix; a lower bound for the rational rank."""
    arr = np.asarray(rows, dtype=object) if not isinstance(rows, np.ndarray) else rows
    if arr.size == 0:
        return 0
    nr, nc = arr.shape
    flat = np.mod(arr.astype(np.int64) if arr.dtype != object else arr, p).ravel().tolist()
    return flint.nmod_mat(nr, nc, [int(x) for x in flat], p).rank()


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    return flint.fmpz_mat(rows).rank()


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[list[Fraction]]:
    """Exact rational kernel basis (rref-normalised) of an integer matrix."""
    rows = [list(r) for r in rows]
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    M = flint.fmpq_mat(flint.fmpz_mat(rows))
    return kernel_basis(Matrix(M))
