"""Jordan algebras of symmetric matrices: closure, center, simple ideals, types.

Elements are exact symmetric :class:`~folialg.core.Matrix` objects with the
product ``A.B = (AB + BA)/2``.  A quadratic form ``f`` corresponds to the
matrix ``hessian_half(f)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from .core import (ClusterAmbiguity, Matrix, ToleranceContext, kernel_basis, row_basis, symmetric_eigensplit,
                   to_fmpq, to_fraction)
from .polyring import Polynomial, hessian_half, quad_form, transnormal_product

log = logging.getLogger(__name__)


class JordanError(ValueError):
    """Base class for classification failures."""


class NotClosed(JordanError):
    pass


class NotFormallyReal(JordanError):
    pass


class ExceptionalAlbert(JordanError):
    """The 27-dimensional rank-3 exceptional algebra cannot act on a real vector space here."""


class UnrecognizedDimension(JordanError):
    pass


class GenericityFailure(JordanError):
    """Random samples disagreed where a generic answer was expected."""


class IrrationalIdempotents(JordanError):
    """The central idempotents are not rational combinations of the basis."""


class NotIdempotent(ValueError):
    pass


def jordan_product(A: Matrix, B: Matrix) -> Matrix:
    return (A @ B + B @ A) * Fraction(1, 2)


def _sym_coords(A: Matrix) -> list:
    """Upper-triangular entries of a symmetric matrix as flint rationals."""
    n = A.nrows
    m = A.flint
    return [m[i, j] for i in range(n) for j in range(i, n)]


# <grad f, grad g> of two quadratic forms is 4 times the form of the Jordan product
TRANSNORMAL_SCALE = Fraction(1, 4)


def quadratic_product(f: Polynomial, g: Polynomial) -> Polynomial:
    """Jordan product of two quadratic forms, computed through the transnormal product."""
    return transnormal_product(f, g).scale(TRANSNORMAL_SCALE)


def delta(m: int) -> int:
    """Dimension of an irreducible Clifford module for the system with m+1 matrices."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return 1
    base = [1, 2, 4, 4, 8, 8, 8, 8]
    q, r = divmod(m - 1, 8)
    return base[r] * 16 ** q


class JordanAlgebra:
    """Span of linearly independent symmetric n x n matrices, closed under the Jordan product."""

    def __init__(self, basis: Sequence[Matrix], check_closed: bool = True):
        basis = list(basis)
        if not basis:
            raise JordanError("empty basis")
        n = basis[0].nrows
        for b in basis:
            if not b.is_symmetric() or b.nrows != n:
                raise JordanError("basis elements must be symmetric matrices of one size")
        self.n = n
        self.basis = basis
        self._setup_coords()
        if len(self._pivots) != len(basis):
            raise JordanError("basis is linearly dependent")
        self._structure = None
        if check_closed and not self.is_closed():
            raise NotClosed("span is not closed under the Jordan product")

    def _setup_coords(self):
        N = self.n * (self.n + 1) // 2
        M = flint.fmpq_mat(len(self.basis), N, [x for b in self.basis for x in _sym_coords(b)])
        R, r = M.rref()
        pivots = []
        for i in range(r):
            for j in range(N):
                if R[i, j] != 0:
                    pivots.append(j)
                    break
        self._pivots = pivots
        # coordinates come from solving on the pivot columns, then checking all columns
        if len(pivots) == len(self.basis):
            sub = flint.fmpq_mat(len(pivots), len(pivots),
                                 [M[i, p] for p in pivots for i in range(len(self.basis))])
            self._pivot_inv = sub.inv()
        self._flat = M

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, A: Matrix) -> list[Fraction] | None:
        """Coordinates of A in the basis, or None if A is not in the span."""
        v = _sym_coords(A)
        rhs = flint.fmpq_mat(len(self._pivots), 1, [v[p] for p in self._pivots])
        c = self._pivot_inv * rhs
        cs = [c[i, 0] for i in range(self.dim)]
        recon = flint.fmpq_mat(1, self.dim, cs) * self._flat
        if list(recon.entries()) != v:
            return None
        return [to_fraction(x) for x in cs]

    def contains(self, A: Matrix) -> bool:
        return A.shape == (self.n, self.n) and A.is_symmetric() and self.coords(A) is not None

    def element(self, coeffs: Sequence) -> Matrix:
        out = Matrix.zeros(self.n)
        for c, b in zip(coeffs, self.basis):
            c = to_fraction(c)
            if c:
                out = out + b * c
        return out

    def random_element(self, rng: np.random.Generator, bound: int = 10) -> Matrix:
        return self.element([int(x) for x in rng.integers(-bound, bound + 1, size=self.dim)])

    def product(self, A: Matrix, B: Matrix) -> Matrix:
        return jordan_product(A, B)

    def is_closed(self) -> bool:
        for i in range(self.dim):
            for j in range(i, self.dim):
                if self.coords(jordan_product(self.basis[i], self.basis[j])) is None:
                    return False
        return True

    def structure_constants(self) -> list[flint.fmpq_mat]:
        """L[i] is the matrix of multiplication by basis[i] in basis coordinates (columns = inputs)."""
        if self._structure is None:
            d = self.dim
            cols = {}
            for i in range(d):
                for j in range(i, d):
                    c = self.coords(jordan_product(self.basis[i], self.basis[j]))
                    if c is None:
                        raise NotClosed("span is not closed under the Jordan product")
                    cols[(i, j)] = cols[(j, i)] = c
            L = []
            for i in range(d):
                m = flint.fmpq_mat(d, d)
                for j in range(d):
                    for k, v in enumerate(cols[(i, j)]):
                        if v:
                            m[k, j] = flint.fmpq(v.numerator, v.denominator)
                L.append(m)
            self._structure = L
        return self._structure

    def multiplication_operator(self, A: Matrix) -> flint.fmpq_mat:
        c = self.coords(A)
        if c is None:
            raise JordanError("element not in algebra")
        L = self.structure_constants()
        out = flint.fmpq_mat(self.dim, self.dim)
        for ci, Li in zip(c, L):
            if ci:
                out += Li * flint.fmpq(ci.numerator, ci.denominator)
        return out

    def unit(self) -> Matrix:
        """The unit element, from the linear system e.b = b for every basis element."""
        d = self.dim
        L = self.structure_constants()
        # e = sum c_i b_i with sum_i c_i L_i[:, j] = e_j for every j
        rows, rhs = [], []
        for j in range(d):
            for k in range(d):
                rows.append([L[i][k, j] for i in range(d)])
                rhs.append(flint.fmpq(int(j == k)))
        A = flint.fmpq_mat(len(rows), d, [x for r in rows for x in r])
        sol = _solve_consistent(A, rhs)
        return self.element(sol)

    def trace_form_gram(self) -> Matrix:
        d = self.dim
        return Matrix([[jordan_product(self.basis[i], self.basis[j]).trace() for j in range(d)] for i in range(d)])

    def is_formally_real(self) -> bool:
        """Positive definiteness of the trace form tr(a.b), checked by exact pivots."""
        return _positive_definite(self.trace_form_gram())

    def subalgebra(self, mats: Sequence[Matrix]) -> "JordanAlgebra":
        vecs = [_sym_coords(m) for m in mats]
        M = flint.fmpq_mat(len(vecs), len(vecs[0]), [x for v in vecs for x in v])
        keep = _independent_rows(M)
        return JordanAlgebra([mats[i] for i in keep])

    def to_json(self) -> dict:
        return {"n": self.n, "basis": [b.to_json() for b in self.basis]}


def _solve_consistent(A: flint.fmpq_mat, rhs: Sequence) -> list[Fraction]:
    """Some solution of a consistent (possibly overdetermined) system."""
    nr, nc = A.nrows(), A.ncols()
    aug = flint.fmpq_mat(nr, nc + 1, [x for i in range(nr) for x in [A[i, j] for j in range(nc)] + [rhs[i]]])
    R, r = aug.rref()
    sol = [Fraction(0)] * nc
    for i in range(r):
        for j in range(nc + 1):
            if R[i, j] != 0:
                if j == nc:
                    raise JordanError("inconsistent system (no unit)")
                sol[j] = to_fraction(R[i, nc])
                break
    return sol


def _independent_rows(M: flint.fmpq_mat) -> list[int]:
    keep = []
    cur = 0
    for i in range(M.nrows()):
        sub = flint.fmpq_mat(len(keep) + 1, M.ncols(), [M[k, j] for k in keep + [i] for j in range(M.ncols())])
        r = sub.rank()
        if r > cur:
            keep.append(i)
            cur = r
    return keep


def _positive_definite(G: Matrix) -> bool:
    """Exact test by symmetric Gaussian elimination (all pivots positive)."""
    a = G.tolist()
    n = len(a)
    for k in range(n):
        if a[k][k] <= 0:
            return False
        for i in range(k + 1, n):
            f = a[i][k] / a[k][k]
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return True


def close(seed: Sequence[Matrix], max_dim: int | None = None) -> JordanAlgebra:
    """Smallest Jordan algebra containing the seed (span closed under the product).

    Seed elements are kept (when independent) so the basis starts with them.
    """
    seed = [s for s in seed]
    if not seed:
        raise JordanError("empty seed")
    n = seed[0].nrows
    N = n * (n + 1) // 2
    max_dim = max_dim or N

    basis: list[Matrix] = []
    R = flint.fmpq_mat(0, N)
    rank = 0

    def try_add(A: Matrix) -> bool:
        nonlocal R, rank
        if not A.is_symmetric() or A.nrows != n:
            raise JordanError("seed must be symmetric matrices of one size")
        v = _sym_coords(A)
        stacked = flint.fmpq_mat(rank + 1, N, list(R.entries()) + v)
        S, r = stacked.rref()
        if r > rank:
            R = flint.fmpq_mat(r, N, [S[i, j] for i in range(r) for j in range(N)])
            rank = r
            basis.append(A)
            return True
        return False

    for s in seed:
        try_add(s)
    done = 0
    # pairs (i, j) with j < done were already processed
    while True:
        start = len(basis)
        for i in range(len(basis)):
            for j in range(max(i, done), len(basis)) if i < done else range(i, len(basis)):
                try_add(jordan_product(basis[i], basis[j]))
                if len(basis) > max_dim:
                    raise JordanError("closure exceeded the dimension cap")
        done = start
        if len(basis) == start:
            break
    return JordanAlgebra(basis)


def center(J: JordanAlgebra) -> list[Matrix]:
    """Basis of the center {z : L_z L_a = L_a L_z for all a}."""
    L = J.structure_constants()
    d = J.dim
    # unknowns c_i; equations: sum_i c_i [L_i, L_a] = 0 for every a
    comms = [[Li * La - La * Li for Li in L] for La in L]
    rows = []
    for a in range(d):
        for k in range(d):
            for j in range(d):
                row = [comms[a][i][k, j] for i in range(d)]
                if any(x != 0 for x in row):
                    rows.append(row)
    if not rows:
        return list(J.basis)
    M = Matrix(flint.fmpq_mat(len(rows), d, [x for r in rows for x in r]))
    return [J.element(v) for v in kernel_basis(M)]


@dataclass
class SimpleFactor:
    """One simple ideal of a decomposition."""

    kind: str
    param: int
    multiplicity: int
    subspace_dim: int
    projector: Matrix
    ideal: JordanAlgebra | None = field(default=None, repr=False)
    note: str = ""

    @property
    def name(self) -> str:
        return f"{self.kind}({self.param})"

    @property
    def division_dim(self) -> int:
        return {"RealHermitian": 1, "ComplexHermitian": 2, "QuaternionHermitian": 4}.get(self.kind, 0)

    def to_json(self) -> dict:
        out = {
            "type": self.kind,
            "n_or_m": self.param,
            "multiplicity": self.multiplicity,
            "subspace_dim": self.subspace_dim,
            "projector": self.projector.to_json(),
        }
        if self.note:
            out["note"] = self.note
        return out


_COINCIDENCES = {
    ("SpinFactor", 2): "isomorphic to RealHermitian(2)",
    ("SpinFactor", 3): "isomorphic to ComplexHermitian(2)",
    ("SpinFactor", 5): "isomorphic to QuaternionHermitian(2)",
}


def jordan_rank(basis: Sequence[Matrix], unit: Matrix, rng: np.random.Generator, samples: int = 5) -> int:
    """Degree of the minimal polynomial of a generic element, from several samples."""
    N = unit.nrows * (unit.nrows + 1) // 2
    ranks = set()
    for _ in range(samples):
        a = Matrix.zeros(unit.nrows)
        for b in basis:
            a = a + b * int(rng.integers(-10 ** 6, 10 ** 6 + 1))
        powers = [unit]
        rows = [_sym_coords(unit)]
        while True:
            nxt = powers[-1] @ a
            rows.append(_sym_coords(nxt))
            M = flint.fmpq_mat(len(rows), N, [x for r in rows for x in r])
            if M.rank() < len(rows):
                ranks.add(len(rows) - 1)
                break
            powers.append(nxt)
    if len(ranks) != 1:
        raise GenericityFailure(f"rank samples disagree: {sorted(ranks)}")
    return ranks.pop()


def classify_simple(basis: Sequence[Matrix], unit: Matrix, subspace_dim: int,
                    rng: np.random.Generator | None = None) -> tuple[str, int, int, str]:
    """Type, parameter, multiplicity and note of a simple formally real Jordan algebra."""
    rng = rng or np.random.default_rng(0)
    d = len(basis)
    r = jordan_rank(basis, unit, rng)
    if r == 1:
        if d != 1:
            raise UnrecognizedDimension(f"rank 1 with dimension {d}")
        return "RealHermitian", 1, subspace_dim, ""
    if r == 2:
        if d < 3:
            raise UnrecognizedDimension("rank 2 with dimension < 3 is not simple")
        m = d - 2
        if subspace_dim % (2 * delta(m)):
            raise JordanError(f"subspace dimension {subspace_dim} is not a multiple of 2*delta({m})")
        mult = subspace_dim // (2 * delta(m))
        return "SpinFactor", m + 1, mult, _COINCIDENCES.get(("SpinFactor", m + 1), "")
    if d == 27 and r == 3:
        raise ExceptionalAlbert("27-dimensional rank-3 factor is exceptional")
    for kind, dd, dk in (("RealHermitian", r * (r + 1) // 2, 1),
                         ("ComplexHermitian", r * r, 2),
                         ("QuaternionHermitian", r * (2 * r - 1), 4)):
        if d == dd:
            if subspace_dim % (r * dk):
                raise JordanError(f"subspace dimension {subspace_dim} not divisible by {r * dk}")
            return kind, r, subspace_dim // (r * dk), ""
    raise UnrecognizedDimension(f"no simple type of rank {r} and dimension {d}")


def _central_idempotents(J: JordanAlgebra, Z: list[Matrix], unit: Matrix, rng: np.random.Generator) -> list[Matrix]:
    """Primitive central idempotents by exact spectral projection of a generic central element."""
    if len(Z) == 1:
        return [unit]
    C = JordanAlgebra(Z, check_closed=False)
    for _attempt in range(20):
        coeffs = [int(x) for x in rng.integers(-1000, 1001, size=len(Z))]
        z = C.element(coeffs)
        # multiplication by z on the center, in center coordinates
        cols = [C.coords(jordan_product(z, w)) for w in Z]
        if any(c is None for c in cols):
            raise NotClosed("center is not closed")
        Lz = flint.fmpq_mat(len(Z), len(Z), [to_fmpq(cols[j][i]) for i in range(len(Z)) for j in range(len(Z))])
        _, factors = Lz.charpoly().factor()
        if any(f.degree() > 1 for f, _ in factors):
            raise IrrationalIdempotents("central idempotents are not rational")
        if any(mult > 1 for _, mult in factors):
            continue  # eigenvalue collision, resample
        roots = [to_fraction(-f[0] / f[1]) for f, _ in factors]
        idems = []
        for a, ca in enumerate(roots):
            e = unit
            for b, cb in enumerate(roots):
                if b != a:
                    e = (e @ (z - unit * cb)) * (1 / (ca - cb))
            idems.append(e)
        return idems
    raise GenericityFailure("could not separate central eigenvalues")


def decompose(J: JordanAlgebra, rng: np.random.Generator | None = None) -> list[SimpleFactor]:
    """Split J into simple ideals and classify each one exactly."""
    rng = rng or np.random.default_rng(0)
    if not J.is_formally_real():
        raise NotFormallyReal("trace form is not positive definite")
    unit = J.unit()
    Z = center(J)
    idems = _central_idempotents(J, Z, unit, rng)
    # exact checks: orthogonal idempotents summing to the unit, all central
    total = Matrix.zeros(J.n)
    for i, e in enumerate(idems):
        if e @ e != e or not J.contains(e):
            raise JordanError("central projector failed exact verification")
        for f in idems[i + 1:]:
            if not (e @ f).is_zero():
                raise JordanError("central projectors are not orthogonal")
        total = total + e
    if total != unit:
        raise JordanError("central projectors do not sum to the unit")

    factors = []
    for e in idems:
        mats = [jordan_product(e, b) for b in J.basis]
        mats = [m for m in mats if not m.is_zero()]
        ideal = J.subalgebra(mats)
        sub_dim = e.rank()
        kind, param, mult, note = classify_simple(ideal.basis, e, sub_dim, rng)
        factors.append(SimpleFactor(kind, param, mult, sub_dim, e, ideal, note))
    factors.sort(key=lambda f: (f.projector.trace(), [(-x) for x in f.projector.entries()]))
    return factors


def classify(J: JordanAlgebra, rng: np.random.Generator | None = None) -> list[SimpleFactor]:
    return decompose(J, rng)


# idempotents and invariant subspaces

def _as_matrix(f) -> Matrix:
    return f if isinstance(f, Matrix) else hessian_half(f)


def projector_onto(vectors: Sequence[Sequence], n: int) -> Matrix:
    """Orthogonal projector onto the span of the given vectors, exact."""
    vectors = [list(v) for v in vectors if any(to_fraction(x) != 0 for x in v)]
    if not vectors:
        return Matrix.zeros(n)
    B = Matrix(row_basis(Matrix(vectors))).T
    return B @ (B.T @ B).inverse() @ B.T


def idempotent_from_subspace(W: Sequence[Sequence], n: int) -> Polynomial:
    """Quadratic form whose Hessian/2 projects onto the orthogonal complement of W."""
    P = projector_onto(W, n)
    return quad_form(Matrix.identity(n) - P)


def subspace_from_idempotent(f) -> list[list[Fraction]]:
    """Zero set of an idempotent quadratic form, as an rref basis."""
    A = _as_matrix(f)
    if A @ A != A:
        raise NotIdempotent("Hessian/2 is not a projector")
    return kernel_basis(A)


def same_subspace(U: Sequence[Sequence], W: Sequence[Sequence]) -> bool:
    def canon(vs):
        vs = [list(v) for v in vs]
        if not vs:
            return []
        return row_basis(Matrix(vs))
    return canon(U) == canon(W)


@dataclass
class Eigenspace:
    value: object
    basis: object
    exact: bool


def eigenspace_split(f, tol: ToleranceContext | None = None, max_denominator: int = 10 ** 6) -> list[Eigenspace]:
    """Eigenspaces of Hessian/2 of f.

    Float clustering finds the spectrum; clusters whose eigenvalue snaps to a
    rational with the right exact kernel dimension are returned exactly.
    """
    A = _as_matrix(f)
    n = A.nrows
    clusters = symmetric_eigensplit(A, tol)
    out = []
    for lam, vecs in clusters:
        q = Fraction(lam).limit_denominator(max_denominator)
        basis = kernel_basis(A - Matrix.identity(n) * q)
        if len(basis) == vecs.shape[1]:
            out.append(Eigenspace(q, basis, True))
        else:
            out.append(Eigenspace(lam, vecs, False))
    return out


def reconstruct_from_eigenspaces(spaces: Sequence[Eigenspace], n: int):
    """Sum of eigenvalue times projector; exact if every eigenspace is exact."""
    if all(s.exact for s in spaces):
        out = Matrix.zeros(n)
        for s in spaces:
            out = out + projector_onto(s.basis, n) * s.value
        return out
    out = np.zeros((n, n))
    for s in spaces:
        if s.exact:
            B = Matrix(s.basis).T.to_float() if s.basis else np.zeros((n, 0))
            Q, _ = np.linalg.qr(B)
        else:
            Q = s.basis
        out += float(s.value) * Q @ Q.T
    return out


__all__ = [
    "JordanAlgebra", "SimpleFactor", "Eigenspace", "JordanError", "NotClosed", "NotFormallyReal", "ExceptionalAlbert",
    "UnrecognizedDimension", "GenericityFailure", "IrrationalIdempotents", "NotIdempotent", "ClusterAmbiguity",
    "jordan_product", "quadratic_product", "TRANSNORMAL_SCALE", "close", "center", "decompose", "classify", "classify_simple", "jordan_rank", "delta",
    "idempotent_from_subspace", "subspace_from_idempotent", "projector_onto", "same_subspace", "eigenspace_split",
    "reconstruct_from_eigenspaces",
]
