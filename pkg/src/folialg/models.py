"""Built-in foliation models: generators, tangent oracles and leaf-preserving signs.

Realification convention, used everywhere in this package: a complex scalar
a+bi acts on (re, im) by the left multiplication matrix [[a, -b], [b, a]];
a quaternion acts on (1, i, j, k) coordinates by its left multiplication
matrix, and right multiplication is used for the group side.  A point of
the diagonal model with n copies of K^k is stored copy by copy, then
coordinate by coordinate, then real component.
"""

from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import clifford as cl
from .core import Matrix, kernel_basis, to_fraction
from .polyring import Polynomial, quad_form

Vector = list[Fraction]


class ModelError(ValueError):
    pass


# division algebras: elements are coefficient tuples over (1, i, j, k)

_DIM = {"R": 1, "C": 2, "H": 4}


def _qmul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return (a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2)


def _units(K: str) -> list[tuple]:
    d = _DIM[K]
    return [tuple(int(i == j) for j in range(d)) for i in range(d)]


def _mul(K: str, p, q):
    if K == "R":
        return (p[0] * q[0],)
    if K == "C":
        return (p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0])
    return _qmul(p, q)


def left_mult_matrix(K: str, q) -> Matrix:
    """Real matrix of x -> q x on K."""
    cols = [_mul(K, q, e) for e in _units(K)]
    return Matrix([[cols[j][i] for j in range(len(cols))] for i in range(len(cols))])


def right_mult_matrix(K: str, q) -> Matrix:
    cols = [_mul(K, e, q) for e in _units(K)]
    return Matrix([[cols[j][i] for j in range(len(cols))] for i in range(len(cols))])


def realify(K: str, entries: Sequence[Sequence[tuple]], right: bool = False) -> Matrix:
    """Real block matrix of a K-matrix acting by left (or right) scalar multiplication."""
    mat = right_mult_matrix if right else left_mult_matrix
    return Matrix.block([[mat(K, q) for q in row] for row in entries])


def _zero(K):
    return (0,) * _DIM[K]


def _conj(K, q):
    return (q[0],) + tuple(-x for x in q[1:])


def hermitian_basis(K: str, n: int) -> list[list[list[tuple]]]:
    """Basis of n x n Hermitian matrices over K as nested lists of scalars."""
    out = []
    units = _units(K)
    for i in range(n):
        for j in range(i, n):
            for u in ([units[0]] if i == j else units):
                A = [[_zero(K) for _ in range(n)] for _ in range(n)]
                A[i][j] = u
                A[j][i] = _conj(K, u)
                out.append(A)
    return out


def skew_hermitian_basis(K: str, k: int) -> list[list[list[tuple]]]:
    out = []
    units = _units(K)
    for a in range(k):
        for u in units[1:]:
            A = [[_zero(K) for _ in range(k)] for _ in range(k)]
            A[a][a] = u
            out.append(A)
    for a in range(k):
        for b in range(a + 1, k):
            for u in units:
                A = [[_zero(K) for _ in range(k)] for _ in range(k)]
                A[a][b] = u
                A[b][a] = tuple(-x for x in _conj(K, u))
                out.append(A)
    return out


def diagonal_jordan_basis(K: str, k: int, n: int) -> list[Matrix]:
    """Hermitian basis of H_n(K) realified and tensored with I_k (copy-major layout)."""
    d = _DIM[K]
    mats = []
    for A in hermitian_basis(K, n):
        # real entry at ((i, a, c), (j, b, c')) = delta_ab * L(A_ij)[c, c']
        blocks = [[_kron_identity(left_mult_matrix(K, A[i][j]), k, d) for j in range(n)] for i in range(n)]
        mats.append(Matrix.block(blocks))
    return mats


def _kron_identity(L: Matrix, k: int, d: int) -> Matrix:
    """I_k tensor L: the scalar block repeated along k coordinates."""
    return Matrix.block_diag(*([L] * k)) if k > 1 else L


def diagonal_lie_basis(K: str, k: int, n: int) -> list[Matrix]:
    """so(k), u(k) or sp(k) realified, acting by right multiplication on every copy."""
    out = []
    for T in skew_hermitian_basis(K, k):
        # copy vector row y (1 x k over K) -> y T; real block ((b), (a)) = R(T_ab)
        blocks = [[right_mult_matrix(K, T[a][b]) for a in range(k)] for b in range(k)]
        X = Matrix.block(blocks)
        out.append(Matrix.block_diag(*([X] * n)) if n > 1 else X)
    return out


@dataclass
class FoliationModel:
    """A foliation given by generator polynomials and a tangent oracle.

    ``lie`` lists skew matrices whose action x -> X x spans the leaf tangent
    space (orbit models).  Otherwise ``jacobian_oracle`` says the leaf
    tangent space at a regular point is the kernel of the Jacobian of the
    generators.  ``discrete`` lists leaf-preserving linear maps that basic
    polynomials must also be invariant under.
    """

    dim: int
    generators: list[Polynomial]
    provenance: str
    lie: list[Matrix] | None = None
    jacobian_oracle: bool = False
    custom_tangent: Callable[[Sequence], list] | None = field(default=None, repr=False)
    discrete: list[Matrix] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    clifford_system: cl.CliffordSystem | None = field(default=None, repr=False)
    parts: list["FoliationModel"] = field(default_factory=list, repr=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def tangent(self, x: Sequence) -> list[Vector] | None:
        """Tangent vectors to the leaf through x, or None when x is not a usable sample."""
        x = [to_fraction(v) for v in x]
        if self.parts:
            out = []
            off = 0
            for p in self.parts:
                t = p.tangent(x[off:off + p.dim])
                if t is None:
                    return None
                for v in t:
                    out.append([Fraction(0)] * off + list(v) + [Fraction(0)] * (self.dim - off - p.dim))
                off += p.dim
            return out
        if self.lie is not None:
            return [X.apply(x) for X in self.lie]
        if self.custom_tangent is not None:
            return [[to_fraction(c) for c in v] for v in self.custom_tangent(x)]
        if self.jacobian_oracle:
            rows = [[g.derivative(i)(x) for i in range(self.dim)] for g in self.generators]
            J = Matrix(rows)
            if J.rank() < self.generic_jacobian_rank():
                return None
            return kernel_basis(J)
        return []

    def generic_jacobian_rank(self) -> int:
        if "jac_rank" not in self._cache:
            rng = np.random.default_rng(12345)
            best = 0
            for _ in range(4):
                x = [Fraction(int(v)) for v in rng.integers(-50, 51, size=self.dim)]
                rows = [[g.derivative(i)(x) for i in range(self.dim)] for g in self.generators]
                best = max(best, Matrix(rows).rank())
            self._cache["jac_rank"] = best
        return self._cache["jac_rank"]

    @property
    def lie_type(self) -> bool:
        if self.parts:
            return all(p.lie_type for p in self.parts)
        return self.lie is not None

    def all_discrete(self) -> list[Matrix]:
        return list(self.discrete)

    def to_json(self) -> dict:
        return {"dim": self.dim, "generators": [g.to_json() for g in self.generators], "provenance": self.provenance,
                "flags": list(self.flags)}

    @classmethod
    def from_json(cls, data: dict) -> "FoliationModel":
        prov = data.get("provenance", "")
        try:
            return parse_model(prov)
        except ModelError:
            pass
        gens = [Polynomial.from_json(g) for g in data["generators"]]
        return custom_model(gens, provenance=prov or "custom")


def _reflection_first_coordinate(K: str, k: int, n: int) -> Matrix:
    """The sign change of the first real coordinate of K^k, applied to every copy."""
    d = _DIM[K]
    entries = [(-1 if idx % (k * d) == 0 else 1) for idx in range(n * k * d)]
    return Matrix.diag(entries)


def diagonal_model(K: str, k: int, n: int) -> FoliationModel:
    """O(k), U(k) or Sp(k) acting diagonally on n copies of K^k."""
    if K not in _DIM:
        raise ModelError(f"unknown division algebra {K!r}")
    if k < 1 or n < 1:
        raise ModelError("need k >= 1 and n >= 1")
    gens = [quad_form(A) for A in diagonal_jordan_basis(K, k, n)]
    lie = diagonal_lie_basis(K, k, n)
    discrete = [_reflection_first_coordinate(K, k, n)] if K == "R" else []
    return FoliationModel(n * k * _DIM[K], gens, f"diag:{K},{k},{n}", lie=lie, discrete=discrete)


def _det_polynomial(k: int, n: int) -> Polynomial:
    """det of the first k copies of R^k (columns), as a polynomial on R^{nk}."""
    N = n * k
    out = Polynomial(N)
    for perm in itertools.permutations(range(k)):
        sign = 1
        for i in range(k):
            for j in range(i + 1, k):
                if perm[i] > perm[j]:
                    sign = -sign
        e = [0] * N
        for copy, coord in enumerate(perm):
            e[copy * k + coord] += 1
        out = out + Polynomial(N, {tuple(e): sign})
    return out


def so_model(k: int, n: int) -> FoliationModel:
    """SO(k) acting diagonally on n copies of R^k; generated by Gram entries only."""
    if k < 2 or n < 1:
        raise ModelError("so models need k >= 2")
    gens = [quad_form(A) for A in diagonal_jordan_basis("R", k, n)]
    lie = diagonal_lie_basis("R", k, n)
    return FoliationModel(n * k, gens, f"so:{k},{n}", lie=lie)


def determinant(k: int, n: int) -> Polynomial:
    return _det_polynomial(k, n)


class RelationFailure(ModelError):
    pass


def clifford_model(C: cl.CliffordSystem, provenance: str | None = None) -> FoliationModel:
    """Clifford foliation; the leaves are joined level sets of |x|^2 and the <P_i x, x>."""
    rep = cl.verify_relations(C)
    if not rep.ok:
        raise RelationFailure("; ".join(rep.failures[:3]))
    gens = cl.psi_polynomials(C)
    flags = []
    if C.disconnected:
        flags.append("disconnected-leaves")
        Om = cl.refinement_matrix(C)
        if Om is not None:
            gens = gens + [quad_form(Om)]
            flags.append("refined")
    n = 2 * C.l
    M = FoliationModel(n, gens, provenance or f"clifford:{C.m},{C.multiplicity or C.l}", jacobian_oracle=True,
                       discrete=[Matrix.identity(n) * -1], flags=flags, clifford_system=C)
    return M


def product_model(M1: FoliationModel, M2: FoliationModel) -> FoliationModel:
    n = M1.dim + M2.dim
    gens = [g.lift(n, 0) for g in M1.generators] + [g.lift(n, M1.dim) for g in M2.generators]
    disc = [Matrix.block_diag(g, Matrix.identity(M2.dim)) for g in M1.discrete]
    disc += [Matrix.block_diag(Matrix.identity(M1.dim), g) for g in M2.discrete]
    parts = (M1.parts or [M1]) + (M2.parts or [M2])
    lie = None
    if M1.lie_type and M2.lie_type:
        lie = [Matrix.block_diag(X, Matrix.zeros(M2.dim)) for X in _lie_of(M1)]
        lie += [Matrix.block_diag(Matrix.zeros(M1.dim), X) for X in _lie_of(M2)]
    return FoliationModel(n, gens, f"product:({M1.provenance};{M2.provenance})", lie=lie, discrete=disc,
                          flags=sorted(set(M1.flags) | set(M2.flags)), parts=[] if lie is not None else parts)


def _lie_of(M: FoliationModel) -> list[Matrix]:
    return list(M.lie or [])


def composed_model(C: cl.CliffordSystem, outer: Sequence[Polynomial], provenance: str | None = None) -> FoliationModel:
    """Leaves of |x|^2 together with rho o (<P_0 x,x>, ..., <P_m x,x>) for outer generators rho."""
    if any(g.nvars != C.m + 1 for g in outer):
        raise ModelError("outer generators must live on R^{m+1}")
    psis = cl.psi_polynomials(C)
    inner = psis[1:]
    gens = [psis[0]] + [g.compose(inner) for g in outer]
    gens = [g for g in gens if not g.is_zero()]
    n = 2 * C.l
    return FoliationModel(n, gens, provenance or f"composed:{C.m},{C.multiplicity or C.l}:custom",
                          jacobian_oracle=True, discrete=[Matrix.identity(n) * -1], clifford_system=C)


def circle_outer_generators(m: int) -> list[Polynomial]:
    """Coordinates y_0..y_{m-2} plus y_{m-1}^2 + y_m^2 on R^{m+1}."""
    n = m + 1
    gens = [Polynomial.variable(i, n) for i in range(m - 1)]
    gens.append(Polynomial.variable(m - 1, n) ** 2 + Polynomial.variable(m, n) ** 2)
    return gens


def trivial_model(dim: int = 1) -> FoliationModel:
    """Every point is a leaf; generated by the coordinates."""
    return FoliationModel(dim, [Polynomial.variable(i, dim) for i in range(dim)], f"triv:{dim}", lie=[])


def with_trivial_factor(M: FoliationModel, extra: int = 1) -> FoliationModel:
    return product_model(M, trivial_model(extra))


def custom_model(generators: Sequence[Polynomial], tangent: Callable | None = None,
                 provenance: str = "custom") -> FoliationModel:
    """User model; without a tangent oracle the Jacobian of the generators is used."""
    gens = list(generators)
    if not gens:
        raise ModelError("custom models need at least one generator")
    n = gens[0].nvars
    if any(g.nvars != n for g in gens):
        raise ModelError("generators must share one ambient dimension")
    if any(not g.is_homogeneous() for g in gens):
        raise ModelError("generators must be homogeneous")
    norm = quad_form(Matrix.identity(n))
    if norm not in gens:
        # 0 must be a leaf, so |x|^2 is always basic
        gens = [norm] + gens
    return FoliationModel(n, gens, provenance, jacobian_oracle=tangent is None, custom_tangent=tangent)


class NotInvariant(ModelError):
    pass


def scale_map(M: FoliationModel, W: Sequence[Sequence], lam, seed: int = 0) -> Matrix:
    """The map w1 + w2 -> w1 + lam w2 on W + W^perp, for an invariant subspace W."""
    from .basicpoly import basic_space
    from .jordan import idempotent_from_subspace, projector_onto

    W = [[to_fraction(c) for c in v] for v in W]
    if any(len(v) != M.dim for v in W):
        raise ModelError("subspace vectors have the wrong length")
    if not basic_space(M, 2, seed).contains(idempotent_from_subspace(W, M.dim)):
        raise NotInvariant("subspace is not a union of leaves")
    P = projector_onto(W, M.dim)
    return P + (Matrix.identity(M.dim) - P) * to_fraction(lam)


# model spec grammar

def _split_product(body: str) -> tuple[str, str]:
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == ";" and depth == 0:
            return body[:i], body[i + 1:]
    raise ModelError("product needs two ';'-separated specs")


def parse_model(spec: str) -> FoliationModel:
    """Parse ``diag:K,k,n``, ``so:k,n``, ``clifford:m,k``, ``product:(A;B)``, ``composed:m,k:file.json``
    (or ``composed:m,k:circle`` for the built-in outer circle foliation), ``triv:n``."""
    spec = spec.strip()
    try:
        if spec.startswith("product:"):
            body = spec[len("product:"):].strip()
            if not (body.startswith("(") and body.endswith(")")):
                raise ModelError("product spec must look like product:(A;B)")
            a, b = _split_product(body[1:-1])
            return product_model(parse_model(a), parse_model(b))
        kind, _, rest = spec.partition(":")
        if kind == "diag":
            K, k, n = rest.split(",")
            return diagonal_model(K.strip().upper(), int(k), int(n))
        if kind == "so":
            k, n = rest.split(",")
            return so_model(int(k), int(n))
        if kind == "clifford":
            m, k = rest.split(",")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", cl.DisconnectedLeavesWarning)
                C = cl.build(int(m), int(k))
            return clifford_model(C, provenance=spec)
        if kind == "triv":
            return trivial_model(int(rest))
        if kind == "composed":
            mk, _, path = rest.partition(":")
            m, k = (int(v) for v in mk.split(","))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", cl.DisconnectedLeavesWarning)
                C = cl.build(m, k)
            if path in ("", "circle"):
                outer = circle_outer_generators(m)
            else:
                with open(path) as fh:
                    data = json.load(fh)
                outer = [Polynomial.from_json(g) for g in (data["generators"] if isinstance(data, dict) else data)]
            return composed_model(C, outer, provenance=spec)
    except ModelError:
        raise
    except (ValueError, KeyError, OSError) as exc:
        raise ModelError(f"cannot parse model spec {spec!r}: {exc}") from exc
    raise ModelError(f"unknown model spec {spec!r}")


def model_summary(M: FoliationModel) -> dict:
    out = M.to_json()
    out["oracle"] = "lie" if M.lie_type else ("jacobian" if M.jacobian_oracle else "custom")
    return out


__all__ = [
    "FoliationModel", "ModelError", "diagonal_model", "so_model", "clifford_model", "product_model",
    "composed_model", "custom_model", "trivial_model", "with_trivial_factor", "parse_model", "realify",
    "left_mult_matrix", "right_mult_matrix", "hermitian_basis", "skew_hermitian_basis", "diagonal_jordan_basis",
    "diagonal_lie_basis", "determinant", "circle_outer_generators", "model_summary",
    "NotInvariant", "scale_map", "RelationFailure",
]
