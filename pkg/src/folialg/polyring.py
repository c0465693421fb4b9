"""Sparse exact polynomials over Q and graded subspaces of R[V]_d.

Monomials are exponent tuples.  Inside one degree the order is descending
lexicographic (x1^d first), which together with degree gives graded lex.
A :class:`GradedSubspace` keeps a reduced echelon basis whose pivots are the
leading monomials in that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

import flint

from .core import Matrix, to_fraction

Exp = tuple[int, ...]


class NonSymmetric(ValueError):
    pass


class WrongDegree(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[Exp, ...]:
    """All exponent tuples of the given degree, descending lex."""
    if nvars == 0:
        return ((),) if degree == 0 else ()
    out = []
    for a in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - a):
            out.append((a,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(nvars: int, degree: int) -> dict[Exp, int]:
    return {e: i for i, e in enumerate(monomials(nvars, degree))}


def num_monomials(nvars: int, degree: int) -> int:
    return comb(nvars + degree - 1, degree) if nvars else int(degree == 0)


class Polynomial:
    """Polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Exp, object] | None = None):
        self.nvars = nvars
        clean: dict[Exp, Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(a) for a in e)
            if len(e) != nvars or any(a < 0 for a in e):
                raise ValueError(f"bad exponent {e} for {nvars} variables")
            c = to_fraction(c)
            if c:
                clean[e] = clean.get(e, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exp, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        return p

    @classmethod
    def constant(cls, nvars: int, c=1) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        e = [0] * nvars
        e[i] = 1
        return cls._raw(nvars, {tuple(e): Fraction(1)})

    @classmethod
    def linear(cls, coeffs: Sequence) -> "Polynomial":
        n = len(coeffs)
        return cls(n, {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)})

    # structure
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def homogeneous_part(self, d: int) -> "Polynomial":
        return Polynomial._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def coefficient(self, e: Exp) -> Fraction:
        return self.terms.get(tuple(e), Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), [-a for a in e])):
            mono = "*".join(f"x{i}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
            parts.append(f"{self.terms[e]}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)

    # arithmetic
    def _check(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise ValueError("polynomials live in different rings")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            v = t.get(e, 0) + c
            if v:
                t[e] = v
            else:
                t.pop(e, None)
        return Polynomial._raw(self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other if isinstance(other, Polynomial) else -to_fraction(other))

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = to_fraction(c)
        if not c:
            return Polynomial._raw(self.nvars, {})
        return Polynomial._raw(self.nvars, {e: c * v for e, v in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        t: dict[Exp, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return Polynomial._raw(self.nvars, {e: c for e, c in t.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(self.nvars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # calculus and evaluation
    def derivative(self, i: int) -> "Polynomial":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                t[e2] = c * e[i]
        return Polynomial._raw(self.nvars, t)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(i) for i in range(self.nvars)]

    def __call__(self, x: Sequence):
        """Evaluate; exact when the point is exact, float otherwise."""
        if all(not isinstance(v, float) for v in x):
            x = [to_fraction(v) for v in x]
            total = Fraction(0)
        else:
            x = [float(v) for v in x]
            total = 0.0
        for e, c in self.terms.items():
            term = c if isinstance(total, Fraction) else float(c)
            for xi, a in zip(x, e):
                if a:
                    term = term * xi ** a
            total += term
        return total

    def compose(self, subs: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute polynomial ``subs[i]`` for variable i."""
        if len(subs) != self.nvars:
            raise ValueError("need one substitute per variable")
        if not subs:
            return self
        m = subs[0].nvars
        powers: dict[tuple[int, int], Polynomial] = {}

        def power(i, a):
            key = (i, a)
            if key not in powers:
                powers[key] = subs[i] if a == 1 else power(i, a - 1) * subs[i]
            return powers[key]

        out: dict[Exp, Fraction] = {}
        for e, c in self.terms.items():
            term = Polynomial.constant(m, c)
            for i, a in enumerate(e):
                if a:
                    term = term * power(i, a)
            for e2, c2 in term.terms.items():
                out[e2] = out.get(e2, 0) + c2
        return Polynomial._raw(m, {e: c for e, c in out.items() if c})

    def lift(self, nvars: int, offset: int) -> "Polynomial":
        """View as a polynomial in ``nvars`` variables, ours sitting at ``offset``."""
        right = nvars - offset - self.nvars
        if offset < 0 or right < 0:
            raise ValueError("lift target too small")
        pad_l = (0,) * offset
        pad_r = (0,) * right
        return Polynomial._raw(nvars, {pad_l + e + pad_r: c for e, c in self.terms.items()})

    # serialization
    def to_json(self, names: Sequence[str] | None = None) -> dict:
        order = sorted(self.terms, key=lambda e: (-sum(e), [-a for a in e]))
        out = {"vars": self.nvars, "terms": [{"exp": list(e), "coef": str(self.terms[e])} for e in order]}
        if names is not None:
            out["names"] = list(names)
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Polynomial":
        n = int(data["vars"])
        terms: dict[Exp, Fraction] = {}
        for t in data["terms"]:
            if isinstance(t["coef"], float):
                raise ValueError("polynomial coefficients must be exact")
            e = tuple(t["exp"])
            terms[e] = terms.get(e, Fraction(0)) + to_fraction(t["coef"])
        return cls(n, terms)


def quad_form(A: Matrix) -> Polynomial:
    """The quadratic form x^T A x."""
    if not A.is_symmetric():
        raise NonSymmetric("quadratic forms come from symmetric matrices")
    n = A.nrows
    a = A.tolist()
    t = {}
    for i in range(n):
        for j in range(i, n):
            c = a[i][j] if i == j else 2 * a[i][j]
            if c:
                e = [0] * n
                e[i] += 1
                e[j] += 1
                t[tuple(e)] = c
    return Polynomial._raw(n, t)


def hessian_half(f: Polynomial) -> Matrix:
    """Half the Hessian of a homogeneous quadratic, i.e. the A with f = x^T A x."""
    if f.terms and (f.degree() != 2 or not f.is_homogeneous()):
        raise WrongDegree("hessian_half needs a homogeneous quadratic")
    n = f.nvars
    rows = [[Fraction(0)] * n for _ in range(n)]
    for e, c in f.terms.items():
        idx = [i for i, a in enumerate(e) for _ in range(a)]
        i, j = idx
        if i == j:
            rows[i][i] += c
        else:
            rows[i][j] += c / 2
            rows[j][i] += c / 2
    return Matrix(rows)


def transnormal_product(f: Polynomial, g: Polynomial) -> Polynomial:
    """<grad f, grad g> for the standard inner product.

    For quadratic forms x^T A x and x^T B x this is 4 x^T ((AB+BA)/2) x; the
    factor 4 is removed in :func:`folialg.jordan.quadratic_product`.
    """
    out = Polynomial(f.nvars)
    for df, dg in zip(f.gradient(), g.gradient()):
        out = out + df * dg
    return out


def pullback(phi: Matrix, f: Polynomial) -> Polynomial:
    """f o phi for a linear map phi: R^n -> R^m given as an m x n matrix."""
    if phi.nrows != f.nvars:
        raise DimensionMismatch("map codomain does not match the polynomial's ring")
    rows = phi.tolist()
    lin = [Polynomial._raw(phi.ncols, {tuple(int(k == j) for k in range(phi.ncols)): c for j, c in enumerate(r) if c})
           for r in rows]
    return f.compose(lin)


def multiset_products(generators: Sequence[Polynomial], degree: int) -> Iterable[tuple[tuple[int, ...], Polynomial]]:
    """Products of generators (with repetition) of total degree ``degree``.

    Yields (index multiset, product).  Products are built incrementally so
    each one costs a single multiplication.
    """
    if not generators:
        return
    nvars = generators[0].nvars
    degs = [g.degree() for g in generators]
    if any(dg <= 0 for dg in degs):
        raise ValueError("generators must be nonconstant")
    if any(not g.is_homogeneous() for g in generators):
        raise ValueError("graded spans need homogeneous generators")

    def rec(start, remaining, prefix, value):
        if remaining == 0:
            yield prefix, value
            return
        for i in range(start, len(generators)):
            if degs[i] <= remaining:
                yield from rec(i, remaining - degs[i], prefix + (i,), value * generators[i])

    yield from rec(0, degree, (), Polynomial.constant(nvars))


@dataclass
class GradedSubspace:
    """A subspace of R[V]_d with a reduced echelon basis.

    ``rows`` are sparse dicts; ``pivots[i]`` is the leading monomial of
    ``rows[i]`` and occurs in no other row.
    """

    nvars: int
    degree: int
    rows: list[dict[Exp, Fraction]] = field(default_factory=list)
    pivots: list[Exp] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def ambient_dim(self) -> int:
        return num_monomials(self.nvars, self.degree)

    def basis(self) -> list[Polynomial]:
        return [Polynomial._raw(self.nvars, dict(r)) for r in self.rows]

    def _check(self, f: Polynomial):
        if f.nvars != self.nvars:
            raise ValueError("polynomial lives in a different ring")

    def residue(self, f: Polynomial) -> Polynomial:
        """Reduce f modulo the basis; zero iff f is a member (for homogeneous f of our degree)."""
        self._check(f)
        t = dict(f.terms)
        for piv, row in zip(self.pivots, self.rows):
            c = t.get(piv)
            if c:
                for e, v in row.items():
                    w = t.get(e, 0) - c * v
                    if w:
                        t[e] = w
                    else:
                        t.pop(e, None)
        return Polynomial._raw(self.nvars, t)

    def contains(self, f: Polynomial) -> bool:
        self._check(f)
        if any(sum(e) != self.degree for e in f.terms):
            return f.is_zero()
        return self.residue(f).is_zero()

    def complement_equations(self) -> list[dict[Exp, Fraction]]:
        """Linear functionals on R[V]_d whose common kernel is this subspace.

        One per non-pivot monomial q: l_q(f) = f_q - sum_p f_p * row_p[q].
        """
        pivset = set(self.pivots)
        eqs: dict[Exp, dict[Exp, Fraction]] = {}
        for piv, row in zip(self.pivots, self.rows):
            for e, v in row.items():
                if e != piv:
                    eqs.setdefault(e, {})[piv] = -v
        out = []
        for q in monomials(self.nvars, self.degree):
            if q in pivset:
                continue
            ell = {q: Fraction(1)}
            ell.update(eqs.get(q, {}))
            out.append(ell)
        return out

    def equals(self, other: "GradedSubspace") -> bool:
        return (self.nvars, self.degree, self.pivots) == (other.nvars, other.degree, other.pivots) and all(
            a == b for a, b in zip(self.rows, other.rows))

    def includes(self, other: "GradedSubspace") -> bool:
        return all(self.contains(p) for p in other.basis())

    @classmethod
    def from_rows(cls, nvars: int, degree: int, rows: list[dict[Exp, Fraction]]) -> "GradedSubspace":
        """Wrap rows that are already reduced echelon (pivot = leading monomial)."""
        idx = monomial_index(nvars, degree)
        pairs = sorted(((min(r, key=idx.__getitem__), r) for r in rows if r), key=lambda pr: idx[pr[0]])
        return cls(nvars, degree, [r for _, r in pairs], [p for p, _ in pairs])

    @classmethod
    def span(cls, nvars: int, degree: int, polys: Iterable[Polynomial]) -> "GradedSubspace":
        polys = [p for p in polys if not p.is_zero()]
        for p in polys:
            if p.nvars != nvars or any(sum(e) != degree for e in p.terms):
                raise ValueError("span needs homogeneous polynomials of the stated degree")
        if not polys:
            return cls(nvars, degree)
        idx = monomial_index(nvars, degree)
        cols = sorted({e for p in polys for e in p.terms}, key=idx.__getitem__)
        rows = echelon_rows([p.terms for p in polys], cols)
        return cls.from_rows(nvars, degree, rows)


def echelon_rows(vectors: Sequence[Mapping[Exp, Fraction]], cols: Sequence[Exp]) -> list[dict[Exp, Fraction]]:
    """Exact reduced echelon form of sparse vectors restricted to the listed columns."""
    if not vectors or not cols:
        return []
    cpos = {e: j for j, e in enumerate(cols)}
    M = flint.fmpq_mat(len(vectors), len(cols))
    for i, v in enumerate(vectors):
        for e, c in v.items():
            c = to_fraction(c)
            M[i, cpos[e]] = flint.fmpq(c.numerator, c.denominator)
    R, r = M.rref()
    out = []
    for i in range(r):
        row = {}
        for j in range(len(cols)):
            x = R[i, j]
            if x != 0:
                row[cols[j]] = Fraction(int(x.p), int(x.q))
        out.append(row)
    return out


def graded_span(generators: Sequence[Polynomial], degree: int, nvars: int | None = None) -> GradedSubspace:
    """Degree-d part of the algebra generated by homogeneous generators (constants included)."""
    if nvars is None:
        if not generators:
            raise ValueError("need nvars when there are no generators")
        nvars = generators[0].nvars
    if degree == 0:
        return GradedSubspace.span(nvars, 0, [Polynomial.constant(nvars)])
    return GradedSubspace.span(nvars, degree, (p for _, p in multiset_products(generators, degree)))


def member(f: Polynomial, S: GradedSubspace) -> bool:
    if any(sum(e) != S.degree for e in f.terms):
        raise WrongDegree(f"expected a homogeneous polynomial of degree {S.degree}")
    return S.contains(f)
