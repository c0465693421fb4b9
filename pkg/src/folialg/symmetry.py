"""Foliated symmetries from orthogonal Hessians, moduli of invariant subspaces, transitivity witnesses.

Every symmetry produced here is a symmetric orthogonal matrix lying in the
Jordan algebra of Hessians of degree-two basic polynomials.  Such a matrix
is the Hessian of a basic quadratic, hence takes leaves onto leaves.

Spin factor e V_i with unit e: traceless elements v satisfy v^2 = q(v) e,
and for q(v) = 1 the matrix v + (I - e) is an orthogonal involution.  A
rational orthonormal frame of the traceless part is found by searching
small integer combinations whose norm is a rational square.

Real Hermitian factor H_n(R) (x) I_k: the commutant of the factor on V_i is
M_k(R).  A rank-n idempotent of the commutant cuts out a slice S on which
the factor acts as all symmetric n x n matrices.  For s in S the element
of the factor restricting to s s^T / |s|^2 on S is a rank-one idempotent e_s,
and I - 2 e_s acts as the reflection in s^perp on every copy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from .basicpoly import F2Report
from .core import Matrix, clear_denominators, exact_sqrt, kernel_basis, span_basis, to_fmpq, to_fraction
from .homsolver import is_foliated
from .jordan import JordanError, SimpleFactor, _solve_consistent, projector_onto
from .models import FoliationModel

Vector = list[Fraction]


class UnsupportedType(ValueError):
    pass


class NotSameDimension(ValueError):
    pass


class NotInFactor(ValueError):
    pass


# helpers on spin factors

def _vector_part(factor: SimpleFactor) -> list[Matrix]:
    """Basis of the traceless part of a spin factor."""
    e = factor.projector
    te = e.trace()
    out = []
    for B in factor.ideal.basis:
        v = B - e * (B.trace() / te)
        if not v.is_zero():
            out.append(v)
    vecs = [list(v.entries()) for v in out]
    keep = _independent(vecs)
    return [out[i] for i in keep]


def _independent(vecs: Sequence[Sequence]) -> list[int]:
    keep, cur = [], []
    for i, v in enumerate(vecs):
        trial = cur + [list(v)]
        if len(span_basis(trial)) == len(trial):
            cur = trial
            keep.append(i)
    return keep


def _spin_form(factor: SimpleFactor):
    te = factor.projector.trace()

    def b(u: Matrix, v: Matrix) -> Fraction:
        return (u @ v).trace() / te
    return b


def _small_combos(basis: Sequence[Matrix], max_support: int = 3, coeffs=(1, -1, 2, -2)):
    """Nonzero integer combinations of few basis elements, smallest first."""
    n = len(basis)
    for v in basis:
        yield v
    for size in range(2, min(max_support, n) + 1):
        for idx in itertools.combinations(range(n), size):
            for cs in itertools.product(coeffs, repeat=size - 1):
                v = basis[idx[0]]
                for c, j in zip(cs, idx[1:]):
                    v = v + basis[j] * c
                if not v.is_zero():
                    yield v


def spin_frame(factor: SimpleFactor) -> list[Matrix]:
    """Rational orthonormal traceless elements v (v^2 = e, pairwise anticommuting), greedily extended."""
    if factor.kind != "SpinFactor":
        raise UnsupportedType("not a spin factor")
    b = _spin_form(factor)
    base = _vector_part(factor)
    chosen: list[Matrix] = []
    while len(chosen) < len(base):
        # orthogonal complement of the chosen frame inside the vector part
        rest = []
        for v in base:
            w = v
            for c in chosen:
                w = w - c * b(v, c)
            rest.append(w)
        keep = _independent([list(w.entries()) for w in rest])
        rest = [rest[i] for i in keep]
        found = None
        for cand in _small_combos(rest):
            s = exact_sqrt(b(cand, cand))
            if s:
                found = cand / s
                break
        if found is None:
            break
        chosen.append(found)
    return chosen


# helpers on real Hermitian factors

def _range_basis(P: Matrix) -> list[Vector]:
    return span_basis(P.T.tolist()) if not P.is_zero() else []


def _coords_in(basis: Sequence[Vector], vecs: Sequence[Vector]) -> Matrix:
    """Coordinates of vecs (as columns) with respect to a basis of their span."""
    B = Matrix.from_columns(basis)
    G = B.T @ B
    return G.inverse() @ B.T @ Matrix.from_columns(vecs)


def _compressed(ops: Sequence[Matrix], basis: Sequence[Vector]) -> list[Matrix]:
    """Matrices of operators preserving span(basis), in that basis."""
    B = Matrix.from_columns(basis)
    Gi = (B.T @ B).inverse() @ B.T
    return [Gi @ A @ B for A in ops]


def _symmetric_commutant(ops: Sequence[Matrix], gram: Matrix) -> list[Matrix]:
    """Operators T with T A = A T for every op, self-adjoint for the given Gram matrix."""
    d = gram.nrows
    rows = []
    for A in ops:
        # (T A - A T)[i, j] = sum_k T[i,k] A[k,j] - A[i,k] T[k,j]
        for i in range(d):
            for j in range(d):
                r = [Fraction(0)] * (d * d)
                for k in range(d):
                    r[i * d + k] += A[k, j]
                    r[k * d + j] -= A[i, k]
                rows.append(r)
    # G T symmetric: sum_k G[i,k] T[k,j] = sum_k G[j,k] T[k,i]
    for i in range(d):
        for j in range(i + 1, d):
            r = [Fraction(0)] * (d * d)
            for k in range(d):
                r[k * d + j] += gram[i, k]
                r[k * d + i] -= gram[j, k]
            rows.append(r)
    ker = kernel_basis(Matrix(rows))
    return [Matrix([v[i * d:(i + 1) * d] for i in range(d)]) for v in ker]


def _rational_eigenspaces(T: Matrix) -> list[tuple[Fraction, list[Vector]]]:
    _, factors = T.charpoly().factor()
    out = []
    for f, _mult in factors:
        if f.degree() == 1:
            lam = to_fraction(-f[0] / f[1])
            ker = kernel_basis(T - Matrix.identity(T.nrows) * lam)
            out.append((lam, ker))
    return out


def real_slice(factor: SimpleFactor) -> list[Vector]:
    """Basis of an n-dimensional subspace on which the real Hermitian factor acts as Sym(n)."""
    if factor.kind != "RealHermitian":
        raise UnsupportedType("slices are built for real Hermitian factors only")
    key = ("slice", factor.projector)
    if key in _SLICES:
        return _SLICES[key]
    n = factor.param
    cur = _range_basis(factor.projector)
    while len(cur) > n:
        ops = _compressed(factor.ideal.basis, cur)
        B = Matrix.from_columns(cur)
        comm = _symmetric_commutant(ops, B.T @ B)
        best = None
        for T in _small_combos(comm, max_support=2, coeffs=(1, -1)):
            for _lam, ker in _rational_eigenspaces(T):
                if n <= len(ker) < len(cur) and (best is None or len(ker) < len(best)):
                    best = ker
            if best is not None and len(best) == n:
                break
        if best is None:
            raise UnsupportedType("no rational slice for this real Hermitian factor")
        cur = span_basis([B.apply(c) for c in best])
    _SLICES[key] = cur
    return cur


_SLICES: dict = {}


def lift_slice_operator(factor: SimpleFactor, S: Sequence[Vector], images: Sequence[Vector]) -> Matrix:
    """The element of the factor mapping each S[b] to images[b]."""
    basis = factor.ideal.basis
    rows, rhs = [], []
    applied = [[A.apply(s) for s in S] for A in basis]
    N = len(S[0])
    for bi in range(len(S)):
        for r in range(N):
            rows.append([to_fmpq(applied[j][bi][r]) for j in range(len(basis))])
            rhs.append(to_fmpq(images[bi][r]))
    A = flint.fmpq_mat(len(rows), len(basis), [x for row in rows for x in row])
    c = _solve_consistent(A, rhs)
    return factor.ideal.element(c)


def _dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def slice_reflection(factor: SimpleFactor, S: Sequence[Vector], s: Vector) -> Matrix:
    """I - 2 e_s, acting as the reflection in s^perp on every copy of the slice."""
    ss = _dot(s, s)
    images = [[c * _dot(s, t) / ss for c in s] for t in S]
    e = lift_slice_operator(factor, S, images)
    return Matrix.identity(e.nrows) - e * 2


def _orthogonal_basis(vecs: Sequence[Vector]) -> list[Vector]:
    out: list[Vector] = []
    for v in vecs:
        w = list(v)
        for u in out:
            c = _dot(w, u) / _dot(u, u)
            w = [a - c * b for a, b in zip(w, u)]
        if any(w):
            out.append(w)
    return out


# generators

def _rank_one_idempotents(factor: SimpleFactor, limit: int = 400) -> list[Matrix]:
    """Rank-one idempotents from spectral projectors of small combinations with rational spectrum."""
    e = factor.projector
    unit_rank = factor.multiplicity * factor.division_dim
    dimJ = factor.ideal.dim
    found: list[Matrix] = []
    vecs: list[list] = []
    tried = 0
    for a in _small_combos(factor.ideal.basis, max_support=2):
        tried += 1
        if tried > limit or len(vecs) == dimJ:
            break
        # a lives in e J e, so extra roots coming from the complement give zero projectors
        _, factors = a.charpoly().factor()
        if any(f.degree() > 1 for f, _ in factors):
            continue
        roots = sorted({to_fraction(-f[0] / f[1]) for f, _ in factors})
        for lam in roots:
            p = e
            for mu in roots:
                if mu != lam:
                    p = (p @ (a - e * mu)) * (1 / (lam - mu))
            if p.is_zero() or p @ p != p or p.rank() != unit_rank:
                continue
            v = list(p.entries())
            if len(span_basis(vecs + [v])) > len(vecs):
                vecs.append(v)
                found.append(p)
    return found


def factor_generators(factor: SimpleFactor) -> list[Matrix]:
    """Orthogonal symmetric involutions in the Jordan algebra attached to one factor."""
    N = factor.projector.nrows
    rest = Matrix.identity(N) - factor.projector
    if factor.kind == "SpinFactor":
        return [v + rest for v in spin_frame(factor)]
    if factor.kind == "RealHermitian":
        S = _orthogonal_basis(real_slice(factor))
        dirs = list(S) + [[a + b for a, b in zip(S[i], S[j])] for i in range(len(S)) for j in range(i + 1, len(S))]
        return [slice_reflection(factor, S, s) for s in dirs]
    return [Matrix.identity(N) - p * 2 for p in _rank_one_idempotents(factor)]


def orthogonal_hessians(report: F2Report) -> list[Matrix]:
    """Generators of foliated isometries, factor by factor."""
    out = []
    for fac in report.factors:
        out.extend(factor_generators(fac))
    return out


def is_orthogonal_involution(g: Matrix) -> bool:
    return g.is_symmetric() and (g @ g).is_identity()


@dataclass
class SymmetryCheck:
    ok: bool
    generators: int
    words: int
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "generators": self.generators, "words": self.words, "failures": self.failures}


def random_words(gens: Sequence[Matrix], count: int, max_len: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    out = []
    for _ in range(count):
        L = int(rng.integers(1, max_len + 1))
        out.append(tuple(int(i) for i in rng.integers(0, len(gens), size=L)))
    return out


def evaluate_word(gens: Sequence[Matrix], word: Sequence[int]) -> Matrix:
    g = Matrix.identity(gens[0].nrows)
    for i in word:
        g = g @ gens[i]
    return g


def verify_foliated_symmetries(M: FoliationModel, gens: Sequence[Matrix], words: int = 50, max_len: int = 6,
                               seed: int = 0) -> SymmetryCheck:
    """Every generator and random words in them take leaves onto leaves."""
    failures = []
    for i, g in enumerate(gens):
        if not is_foliated(M, M, g, "onto", seed):
            failures.append(f"generator {i}")
    if gens and not failures:
        rng = np.random.default_rng(seed)
        for w in random_words(gens, words, max_len, rng):
            if not is_foliated(M, M, evaluate_word(gens, w), "onto", seed):
                failures.append("word " + ",".join(map(str, w)))
    return SymmetryCheck(not failures, len(gens), words if gens else 0, failures)


# moduli

_FIELD = {"RealHermitian": "R", "ComplexHermitian": "C", "QuaternionHermitian": "H"}


@dataclass
class ModuliEntry:
    factor: str
    subspace_dim: int
    dimensions: list[int]
    components: list[str]

    def to_json(self) -> dict:
        return {"factor": self.factor, "subspace_dim": self.subspace_dim, "dimensions": self.dimensions,
                "components": self.components}


@dataclass
class ModuliReport:
    entries: list[ModuliEntry]

    def dimensions(self) -> list[int]:
        """Dimensions of all invariant subspaces (sums over factors)."""
        dims = {0}
        for e in self.entries:
            dims = {a + b for a in dims for b in e.dimensions}
        return sorted(dims)

    def text(self) -> str:
        single = len(self.entries) == 1
        parts = []
        for i, e in enumerate(self.entries):
            top = "{V}" if single else "{V_%d}" % (i + 1)
            labels = [("{0}" if c == "point" and d == 0 else top if c == "point" else c)
                      for d, c in zip(e.dimensions, e.components)]
            parts.append(" ⊔ ".join(labels))
        if single:
            return parts[0]
        return " × ".join(f"({p})" for p in parts)

    def to_json(self) -> dict:
        return {"factors": [e.to_json() for e in self.entries], "dimensions": self.dimensions(), "text": self.text()}


def moduli_report(report: F2Report) -> ModuliReport:
    entries = []
    for fac in report.factors:
        D = fac.subspace_dim
        if fac.kind == "SpinFactor":
            m = fac.param - 1
            entries.append(ModuliEntry(fac.name, D, [0, D // 2, D], ["point", f"S^{m}", "point"]))
        else:
            n, step = fac.param, fac.multiplicity * fac.division_dim
            comps = ["point" if j in (0, n) else f"Gr_{j}({_FIELD[fac.kind]}^{n})" for j in range(n + 1)]
            entries.append(ModuliEntry(fac.name, D, [j * step for j in range(n + 1)], comps))
    return ModuliReport(entries)


# transitivity witnesses

@dataclass
class Witness:
    matrix: Matrix
    isometry: bool
    scale_squared: Fraction | None
    maps_subspace: bool
    foliated: bool | None
    route: str

    @property
    def verified(self) -> bool:
        return self.maps_subspace and self.foliated is not False

    def to_json(self) -> dict:
        return {"matrix": self.matrix.to_json(), "isometry": self.isometry,
                "scale_squared": None if self.scale_squared is None else str(self.scale_squared),
                "maps_subspace": self.maps_subspace, "foliated": self.foliated, "route": self.route}


def _image_equals(g: Matrix, U: Sequence[Vector], W: Sequence[Vector]) -> bool:
    if not U or not W:
        return not U and not W
    img = span_basis([g.apply(u) for u in U])
    return len(img) == len(W) and len(span_basis(img + list(W))) == len(W)


def _inside(P: Matrix, U: Sequence[Vector]) -> bool:
    return all(P.apply(u) == list(u) for u in U)


def _spin_witness(factor: SimpleFactor, U, W) -> tuple[Matrix, Fraction | None, str]:
    e = factor.projector
    N = e.nrows
    rest = Matrix.identity(N) - e
    half = factor.subspace_dim // 2
    if len(U) != half:
        raise NotInFactor("spin-factor witnesses need half-dimensional subspaces")
    v = projector_onto(U, N) * 2 - e
    vp = projector_onto(W, N) * 2 - e
    b = _spin_form(factor)
    if v @ v != e or vp @ vp != e:
        raise NotInFactor("subspace is not an eigenspace of a unit vector of the factor")
    if v == vp:
        return Matrix.identity(N), None, "identity"
    if v == -vp:
        # any unit u orthogonal to v anticommutes with v and swaps its eigenspaces
        for u in spin_frame(factor):
            w = u - v * b(u, v)
            s = exact_sqrt(b(w, w)) if not w.is_zero() else None
            if s:
                return w / s + rest, None, "eta(u)"
    if exact_sqrt(b(v + vp, v + vp)):
        w = v + vp
        return w / exact_sqrt(b(w, w)) + rest, None, "eta(v+v')"
    # eta(v' - v) eta(c) with c orthogonal to v: eta(c) swaps the eigenspaces of v,
    # so the product is an isometry once q(c) q(v' - v) is a rational square
    t = b(vp - v, vp - v)
    orth = _perp_frame(factor, v)
    coeffs = _represent([b(o, o) for o in orth], t)
    if coeffs is not None:
        c = Matrix.zeros(N)
        for y, o in zip(coeffs, orth):
            c = c + o * y
        s = exact_sqrt(t * b(c, c))
        return ((vp - v) @ c) / s + rest, None, "eta(v'-v)eta(c)"
    # non-isometric fallback: the rescaled product still takes leaves onto leaves
    g0 = e + vp @ v
    return g0 + rest, (1 + b(v, vp)) * 2, "scaled"


def _perp_frame(factor: SimpleFactor, v: Matrix) -> list[Matrix]:
    """Orthogonal basis of the complement of a unit vector v, orthonormal when a full frame is known."""
    b = _spin_form(factor)
    frame = spin_frame(factor)
    if len(frame) == len(_vector_part(factor)):
        # the reflection taking frame[0] to v carries the rest of the frame onto v^perp
        a = frame[0] - v
        if a.is_zero():
            return frame[1:]
        qa = b(a, a)
        return [f - a * (2 * b(f, a) / qa) for f in frame[1:]]
    perp = []
    for x in _vector_part(factor):
        y = x - v * b(x, v)
        if not y.is_zero():
            perp.append(y)
    perp = [perp[i] for i in _independent([list(y.entries()) for y in perp])]
    orth: list[Matrix] = []
    for y in perp:
        for o in orth:
            y = y - o * (b(y, o) / b(o, o))
        orth.append(y)
    return orth


def _small_primes(bound: int) -> list[int]:
    sieve = bytearray([1]) * bound
    sieve[:2] = b"\x00\x00"
    for p in range(2, math.isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(sieve[p * p::p]))
    return [p for p in range(bound) if sieve[p]]


_PRIMES = _small_primes(2000)


def _squarefree_class(t: Fraction) -> int:
    """An integer in the square class of a positive rational (exact when every prime
    factor above the trial-division bound appears once)."""
    N = t.numerator * t.denominator
    out = 1
    for p in _PRIMES:
        if p * p > N:
            break
        if N % p == 0:
            e = 0
            while N % p == 0:
                N //= p
                e += 1
            if e % 2:
                out *= p
    return out * N


def _sum_of_squares(N: int, m: int, budget: list[int]) -> list[int] | None:
    """Nonnegative integers y_1..y_m with sum of squares N, by greedy backtracking."""
    if m == 0:
        return [] if N == 0 else None
    if m == 1:
        r = math.isqrt(N)
        return [r] if r * r == N else None
    if m == 2 and N % 4 == 3:
        return None
    top = math.isqrt(N)
    for y in range(top, -1, -1):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        rest = _sum_of_squares(N - y * y, m - 1, budget)
        if rest is not None:
            return [y] + rest
    return None


def _represent(diag: Sequence[Fraction], target: Fraction, bound: int = 6, cap: int = 60000) -> list[int] | None:
    """Small integers y with sum diag_i y_i^2 in the square class of target."""
    n = len(diag)
    if n == 0 or target <= 0:
        return None
    if all(d == 1 for d in diag):
        base = _squarefree_class(target)
        for k in range(1, 30):
            y = _sum_of_squares(base * k * k, n, [20000])
            if y is not None:
                return y
        return None
    tried = 0
    for radius in range(1, bound + 1):
        # all vectors with max |y_i| == radius, first nonzero entry positive
        for y in itertools.product(range(-radius, radius + 1), repeat=n):
            if max(abs(c) for c in y) != radius or next(c for c in y if c) < 0:
                continue
            tried += 1
            if tried > cap:
                return None
            val = sum((d * c * c for d, c in zip(diag, y)), Fraction(0))
            if val and exact_sqrt(val / target) is not None:
                return list(y)
    return None


def _real_witness(factor: SimpleFactor, U, W) -> tuple[Matrix, Fraction | None, str]:
    e = factor.projector
    N = e.nrows
    S = real_slice(factor)
    PS = projector_onto(S, N)

    def meet(X):
        # X is a sum of copies; its trace on the slice
        if not X:
            return []
        PX = projector_onto(X, N)
        rows = (Matrix.identity(N) - PX).vstack(Matrix.identity(N) - PS)
        return kernel_basis(rows)

    US, WS = meet(U), meet(W)
    if len(US) != len(WS):
        raise NotInFactor("subspaces meet the slice in different dimensions")
    # pair up vectors of equal norm, one orthogonal pair at a time; by Witt
    # cancellation the complements stay isometric whenever U_S and W_S are
    us: list[Vector] = []
    targets: list[Vector] = []
    cu, cw = _reduced(US), _reduced(WS)
    ok = True
    while cu:
        pair = _match_norms(cu, cw)
        if pair is None:
            ok = False
            break
        u, t = pair
        us.append(u)
        targets.append(t)
        cu = _reduced([_project_off(x, u) for x in cu])
        cw = _reduced([_project_off(x, t) for x in cw])
    chain: list[Vector] = []
    if ok:
        g = Matrix.identity(N)
        for u, t in zip(us, targets):
            cur = g.apply(u)
            if cur == t:
                continue
            s = [a - bb for a, bb in zip(cur, t)]
            g = slice_reflection(factor, S, s) @ g
            chain.append(s)
        return g, None, f"reflections:{len(chain)}"
    # fallback: intertwiners of projectors, through an intermediate subspace
    # when U meets the orthogonal complement of W
    g = _intertwiner(U, W, N)
    if not _image_equals(g, U, W):
        rng = np.random.default_rng(len(U))
        for _ in range(20):
            h = Matrix.identity(N)
            for _r in range(2):
                coeffs = [int(c) for c in rng.integers(-3, 4, size=len(S))]
                vec = [sum((c * x[r] for c, x in zip(coeffs, S)), Fraction(0)) for r in range(N)]
                if any(vec):
                    h = slice_reflection(factor, S, vec) @ h
            X = span_basis([h.apply(u) for u in U])
            g = _intertwiner(X, W, N) @ _intertwiner(U, X, N)
            if _image_equals(g, U, W):
                break
    return g, None, "intertwiner"


def _saturated(basis: Sequence[Vector]) -> list[list[int]]:
    """A Z-basis of span(basis) intersected with Z^n, from the HNF of [A^T | I] with A x = 0 cutting out the span."""
    n = len(basis[0])
    perp = kernel_basis(Matrix(basis))
    if not perp:
        return [[int(i == j) for j in range(n)] for i in range(n)]
    A = [clear_denominators(v) for v in perp]
    r = len(A)
    M = flint.fmpz_mat([[A[k][i] for k in range(r)] + [int(i == j) for j in range(n)] for i in range(n)])
    H = M.hnf()
    out = []
    for i in range(n):
        if all(H[i, k] == 0 for k in range(r)):
            row = [int(H[i, r + j]) for j in range(n)]
            if any(row):
                out.append(row)
    return out


def _reduced(vecs: Sequence[Vector]) -> list[Vector]:
    """LLL-reduced basis of the integer points of the span, so small combinations have small norms."""
    basis = span_basis(vecs) if vecs else []
    if not basis:
        return []
    R = flint.fmpz_mat(_saturated(basis)).lll()
    return [[Fraction(int(R[i, j])) for j in range(R.ncols())] for i in range(R.nrows())]


def _project_off(x: Vector, u: Vector) -> Vector:
    c = _dot(x, u) / _dot(u, u)
    return [a - c * b for a, b in zip(x, u)]


def _coefficients(n: int, limit: int = 3000):
    """Integer vectors by increasing sup-norm, first nonzero entry positive."""
    count = 0
    for radius in range(1, 200):
        for y in itertools.product(range(-radius, radius + 1), repeat=n):
            if max(map(abs, y)) != radius or next(c for c in y if c) < 0:
                continue
            yield y
            count += 1
            if count >= limit:
                return


def _match_norms(cu: Sequence[Vector], cw: Sequence[Vector]) -> tuple[Vector, Vector] | None:
    """u in span(cu) and t in span(cw) with |u| = |t|, by bucketing square classes.

    Both bases are integral, so the search runs on the integer Gram matrices.
    """
    def gram(B):
        ints = [[int(c) for c in v] for v in B]
        return [[sum(a * b for a, b in zip(x, y)) for y in ints] for x in ints]

    def norm(G, y):
        return sum(y[i] * G[i][j] * y[j] for i in range(len(y)) for j in range(len(y)) if y[i] and y[j])

    def vec(B, y):
        return [sum((c * b[r] for c, b in zip(y, B) if c), Fraction(0)) for r in range(len(B[0]))]

    Gu, Gw = gram(cu), gram(cw)
    seen: dict[int, tuple] = {}
    for y in _coefficients(len(cu)):
        seen.setdefault(_squarefree_class(Fraction(norm(Gu, y))), y)
    for z in _coefficients(len(cw)):
        nz = norm(Gw, z)
        y = seen.get(_squarefree_class(Fraction(nz)))
        if y is not None:
            r = exact_sqrt(Fraction(norm(Gu, y), nz))
            if r is None:
                continue
            return vec(cu, y), [c * r for c in vec(cw, z)]
    return None


def _intertwiner(U, W, N: int) -> Matrix:
    PU, PW = projector_onto(U, N), projector_onto(W, N)
    I = Matrix.identity(N)
    return PW @ PU + (I - PW) @ (I - PU)


def transitivity_witness(factor: SimpleFactor, U: Sequence[Sequence], W: Sequence[Sequence],
                         model: FoliationModel | None = None, seed: int = 0) -> Witness:
    """A foliated map g with g(U) = W, for invariant subspaces of one spin or real Hermitian factor."""
    U = span_basis([[to_fraction(c) for c in u] for u in U]) if U else []
    W = span_basis([[to_fraction(c) for c in w] for w in W]) if W else []
    if len(U) != len(W):
        raise NotSameDimension(f"dim U = {len(U)}, dim W = {len(W)}")
    if factor.kind not in ("SpinFactor", "RealHermitian"):
        raise UnsupportedType(f"{factor.kind} witnesses are verification-only")
    e = factor.projector
    N = e.nrows
    if not (_inside(e, U) and _inside(e, W)):
        raise NotInFactor("subspaces must lie in the factor's isotypical component")
    if len(U) in (0, factor.subspace_dim) or _image_equals(Matrix.identity(N), U, W):
        g, scale, route = Matrix.identity(N), None, "identity"
    elif factor.kind == "SpinFactor":
        g, scale, route = _spin_witness(factor, U, W)
    else:
        g, scale, route = _real_witness(factor, U, W)
    isometry = (g.T @ g).is_identity()
    mapped = _image_equals(g, U, W)
    fol = is_foliated(model, model, g, "onto", seed) if model is not None else None
    return Witness(g, isometry, None if isometry else scale, mapped, fol, route)


def eigenspaces(v: Matrix, factor: SimpleFactor) -> tuple[list[Vector], list[Vector]]:
    """The +1 and -1 eigenspaces of a traceless unit element inside its factor."""
    e = factor.projector
    plus = _range_basis((e + v) / 2)
    minus = _range_basis((e - v) / 2)
    return plus, minus


def random_unit_vector(factor: SimpleFactor, rng: np.random.Generator, bound: int = 4) -> Matrix:
    """A rational point of the unit sphere in the vector part, by inverse stereographic projection."""
    frame = spin_frame(factor)
    if not frame:
        raise JordanError("no rational frame for this spin factor")
    while True:
        t = [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-bound, bound + 1, size=len(frame) - 1),
                                                    rng.integers(1, bound + 1, size=len(frame) - 1))]
        r2 = sum((c * c for c in t), Fraction(0))
        coords = [2 * c / (1 + r2) for c in t] + [(r2 - 1) / (r2 + 1)]
        if len(frame) == 1:
            coords = [Fraction(1)]
        v = Matrix.zeros(frame[0].nrows)
        for c, f in zip(coords, frame):
            v = v + f * c
        return v


def random_invariant_subspace(factor: SimpleFactor, rng: np.random.Generator, bound: int = 3) -> list[Vector]:
    """Range of a random idempotent in the factor's ideal, which is an invariant subspace."""
    e = factor.projector
    N = e.nrows
    if factor.kind == "SpinFactor":
        choice = int(rng.integers(0, 4))
        if choice == 0:
            return []
        if choice == 1:
            return _range_basis(e)
        return eigenspaces(random_unit_vector(factor, rng), factor)[choice - 2]
    n = factor.param
    j = int(rng.integers(0, n + 1))
    if j in (0, n):
        return [] if j == 0 else _range_basis(e)
    if factor.kind == "RealHermitian":
        S = real_slice(factor)
        T = []
        while len(T) < j:
            c = [int(v) for v in rng.integers(-bound, bound + 1, size=len(S))]
            w = [sum((ci * s[r] for ci, s in zip(c, S)), Fraction(0)) for r in range(N)]
            if any(w) and len(span_basis(T + [w])) > len(T):
                T.append(w)
        T = _orthogonal_basis(T)
        images = [[sum((c[r] * _dot(c, t) / _dot(c, c) for c in T), Fraction(0)) for r in range(N)] for t in S]
        return _range_basis(lift_slice_operator(factor, S, images))
    # complex and quaternionic factors: orthogonal rank-one idempotents moved by random generator words
    ps = _rank_one_idempotents(factor)
    chosen: list[Matrix] = []
    for p in ps:
        if all((p @ q).is_zero() for q in chosen):
            chosen.append(p)
        if len(chosen) == j:
            break
    P = Matrix.zeros(N)
    for p in chosen:
        P = P + p
    gens = factor_generators(factor)
    for w in random_words(gens, 1, 4, rng):
        g = evaluate_word(gens, w)
        P = g @ P @ g
    return _range_basis(P)


__all__ = [
    "UnsupportedType", "NotSameDimension", "NotInFactor", "ModuliEntry", "ModuliReport", "SymmetryCheck", "Witness",
    "orthogonal_hessians", "factor_generators", "verify_foliated_symmetries", "moduli_report",
    "transitivity_witness", "spin_frame", "real_slice", "slice_reflection", "lift_slice_operator",
    "is_orthogonal_involution", "eigenspaces", "random_unit_vector", "random_words", "evaluate_word",
    "random_invariant_subspace",
]
