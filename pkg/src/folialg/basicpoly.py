"""Basic polynomials of a foliation model, degree by degree.

A homogeneous f of degree d is basic when <grad f(x), t> = 0 for every
tangent vector t the model's oracle returns at sample points x, and f is
fixed by the model's discrete leaf-preserving maps (diagonal sign changes).
Because the oracle only sees tangent directions, this is the algebra of the
connected refinement of the foliation; the discrete maps put back the part
of the symmetry that the tangents cannot see (for instance reflections in
O(k) versus SO(k)).

The degree-d monomials are cut into pieces that no constraint mixes:

* sign characters: diagonal sign changes D taking leaves to leaves act on
  each monomial by +-1, so basic polynomials split by character;
* block multidegree: coordinate blocks read off from the diagonal elements
  of the degree-two basic Jordan algebra span invariant subspaces, and basic
  polynomials are multihomogeneous with respect to them.

In each piece the basic dimension lies between a lower bound (rank mod p of
products of generators, which are basic) and an upper bound (piece size
minus the rank mod p of sampled constraint rows).  A rank mod p never
exceeds the rational rank, so both bounds are rigorous.  When they meet the
piece is certified.  Otherwise an exact rational kernel is computed from the
samples until it stabilises; for Lie-type models the kernel is then checked
symbolically.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from .core import Matrix, clear_denominators, kernel_basis, span_basis, to_fraction
from .jordan import JordanAlgebra, SimpleFactor, decompose, idempotent_from_subspace
from .models import FoliationModel
from .polyring import (Exp, GradedSubspace, Polynomial, echelon_rows, graded_span, hessian_half,
                       monomials, pullback)

log = logging.getLogger(__name__)

# below 2**26, so a sum of 64 products of two residues fits in int64
PRIME = 67108859
_RADIX = 64  # block multidegrees are packed base 64 (degrees stay below 64)


class NonConvergence(RuntimeError):
    """The sampled constraint system did not stabilise before the sample cap."""


class GroupTooLarge(ValueError):
    pass


def _mod(c: Fraction, p: int) -> int:
    if c.denominator % p == 0:
        raise ArithmeticError(f"denominator divisible by the working prime {p}")
    return c.numerator % p * pow(c.denominator, -1, p) % p


def _odd_mask(e: Exp) -> int:
    m = 0
    for i, a in enumerate(e):
        if a & 1:
            m |= 1 << i
    return m


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _gf2_kernel(rows: Sequence[int], n: int) -> list[int]:
    """Basis of {s in GF(2)^n : popcount(s & r) even for every row r}."""
    basis: list[tuple[int, int]] = []
    for r in rows:
        for pb, pr in basis:
            if r >> pb & 1:
                r ^= pr
        if not r:
            continue
        pb = r.bit_length() - 1
        basis = [(b, row ^ r) if row >> pb & 1 else (b, row) for b, row in basis]
        basis.append((pb, r))
    pivots = {b for b, _ in basis}
    out = []
    for f in range(n):
        if f in pivots:
            continue
        v = 1 << f
        for pb, pr in basis:
            if pr >> f & 1:
                v |= 1 << pb
        out.append(v)
    return out


def _lie_supports(M: FoliationModel, offset: int = 0) -> list[list[tuple[int, int]]] | None:
    """Support patterns of the Lie generators (shifted by offset), None for opaque oracles."""
    if M.lie is not None:
        out = []
        for X in M.lie:
            rows = X.tolist()
            out.append([(i + offset, j + offset) for i, r in enumerate(rows) for j, v in enumerate(r) if v])
        return out
    if M.parts:
        out = []
        off = offset
        for P in M.parts:
            sub = _lie_supports(P, off)
            if sub is None:
                return None
            out += sub
            off += P.dim
        return out
    if M.custom_tangent is not None:
        return None
    return []


def _sign_group(M: FoliationModel) -> list[int]:
    """Diagonal sign changes (as bit masks) that take leaves to leaves.

    D is accepted when every generator is an eigenvector of D^* and D X D = +-X
    for every Lie generator X.  Opaque tangent oracles get no sign changes.
    """
    sup = _lie_supports(M)
    if sup is None:
        return []
    rows = []
    for g in M.generators:
        masks = [_odd_mask(e) for e in g.terms]
        rows += [masks[0] ^ m for m in masks[1:]]
    for s in sup:
        if not s:
            continue
        i0, j0 = s[0]
        base = (1 << i0) ^ (1 << j0)
        rows += [base ^ (1 << i) ^ (1 << j) for i, j in s[1:]]
    return _gf2_kernel(rows, M.dim)


def _discrete_masks(M: FoliationModel) -> list[int]:
    out = []
    for g in M.discrete:
        rows = g.tolist()
        mask = 0
        for i, r in enumerate(rows):
            for j, v in enumerate(r):
                if (i != j and v) or (i == j and v not in (1, -1)):
                    raise ValueError("discrete symmetries must be diagonal sign changes")
            if rows[i][i] == -1:
                mask |= 1 << i
        out.append(mask)
    return out


@dataclass
class _Atom:
    poly: Polynomial
    degree: int
    md: int
    bits: int


@dataclass
class PieceResult:
    """Dimensions inside one piece of R[V]_d."""

    md: int
    bits: int
    size: int
    lower: int
    upper: int
    dim: int
    generated: int
    certified: bool
    samples: int
    method: str
    exps: tuple = field(repr=False, default=())
    products: list = field(repr=False, default_factory=list)
    kernel: list | None = field(repr=False, default=None)


class _Engine:
    def __init__(self, M: FoliationModel, seed: int = 0, sample_cap: int | None = None, prime: int = PRIME):
        self.M = M
        self.n = M.dim
        self.p = prime
        self.seed = seed
        self.sample_cap = sample_cap if sample_cap is not None else 4096
        self.rng = np.random.default_rng(seed)
        self.forbid = _discrete_masks(M)
        self.flips = _sign_group(M)
        self.blocks: list[int] | None = None
        self._x: list[list[int]] = []
        self._tmod: list[np.ndarray] = []
        self._texact: list[list[list[int]] | None] = []
        self._pow_cache: dict[int, np.ndarray] = {}
        self._results: dict[int, list[PieceResult]] = {}
        self._spaces: dict[int, GradedSubspace] = {}
        self.tangent_rank: int | None = None
        self._lie_int = None
        if M.lie is not None:
            ints = []
            for X in M.lie:
                rows = X.tolist()
                den = 1
                for r in rows:
                    for v in r:
                        den = den * v.denominator // math.gcd(den, v.denominator)
                ints.append(np.array([[int(v * den) for v in r] for r in rows], dtype=np.int64))
            self._lie_int = np.array(ints, dtype=np.int64).reshape(len(ints), self.n, self.n)
            probe = np.random.default_rng([seed, 1])
            self.tangent_rank = max(self._rank_p(self._lie_int @ probe.integers(-9, 10, size=self.n))
                                    for _ in range(3)) if ints else 0
        self._atoms = self._make_atoms()
        self._setup_blocks()

    # keys and pieces
    def key(self, e: Exp) -> tuple[int, int]:
        om = _odd_mask(e)
        bits = 0
        for t, s in enumerate(self.flips):
            bits |= _parity(om & s) << t
        md = 0
        if self.blocks is not None:
            for i, a in enumerate(e):
                if a:
                    md += a * _RADIX ** self.blocks[i]
        return md, bits

    def allowed(self, e: Exp) -> bool:
        om = _odd_mask(e)
        return all(not _parity(om & g) for g in self.forbid)

    def pieces(self, d: int) -> dict[tuple[int, int], list[Exp]]:
        out: dict[tuple[int, int], list[Exp]] = defaultdict(list)
        for e in monomials(self.n, d):
            if self.allowed(e):
                out[self.key(e)].append(e)
        return dict(out)

    def _make_atoms(self, polys: Sequence[Polynomial] | None = None) -> list[_Atom]:
        polys = self.M.generators if polys is None else polys
        atoms = []
        for g in polys:
            if g.is_zero() or g.degree() == 0:
                continue
            if not g.is_homogeneous():
                raise ValueError("generators must be homogeneous")
            comps: dict[tuple[int, int], dict] = defaultdict(dict)
            for e, c in g.terms.items():
                comps[self.key(e)][e] = c
            for (md, bits), terms in sorted(comps.items()):
                atoms.append(_Atom(Polynomial._raw(g.nvars, terms), g.degree(), md, bits))
        return atoms

    # blocks from the diagonal part of the degree-two algebra
    def _setup_blocks(self):
        if self.n <= 1:
            return
        S = self.space(2)
        sq = [tuple(2 if j == i else 0 for j in range(self.n)) for i in range(self.n)]
        eqs = S.complement_equations()
        if eqs:
            A = Matrix([[ell.get(s, 0) for s in sq] for ell in eqs])
            diag = kernel_basis(A)
        else:
            diag = [[Fraction(int(i == j)) for j in range(self.n)] for i in range(self.n)]
        sig: dict[tuple, int] = {}
        blocks = []
        for i in range(self.n):
            t = tuple(v[i] for v in diag)
            blocks.append(sig.setdefault(t, len(sig)))
        if len(sig) <= 1:
            return
        # each block indicator must be a diagonal element of the algebra
        for b in range(len(sig)):
            ind = Polynomial(self.n, {sq[i]: 1 for i in range(self.n) if blocks[i] == b})
            if not S.contains(ind):
                return
        old_atoms = self._atoms
        self.blocks = blocks
        split = self._make_atoms()
        if len(split) != len(old_atoms):
            # block components of generators must lie in the generated algebra
            by_deg: dict[int, GradedSubspace] = {}
            gens = [g for g in self.M.generators if not g.is_zero() and g.degree() > 0]
            for a in split:
                if a.degree not in by_deg:
                    by_deg[a.degree] = graded_span(gens, a.degree, self.n)
                if not by_deg[a.degree].contains(a.poly):
                    log.info("block components leave the generated algebra; using sign pieces only")
                    self.blocks = None
                    self._atoms = old_atoms
                    self._results.clear()
                    self._spaces.clear()
                    return
        self._atoms = split
        self._results.clear()
        self._spaces.clear()

    # sampling
    def _new_sample(self) -> bool:
        x = [int(v) for v in self.rng.integers(-9, 10, size=self.n)]
        p = self.p
        if self._lie_int is not None:
            xv = np.array(x, dtype=np.int64)
            T = self._lie_int @ xv  # (t, n) exact integers
            r = self.tangent_rank
            exact = T.tolist()
            Tm = np.mod(T, p)
            if r and T.shape[0] > r:
                C = self.rng.integers(0, p, size=(r, T.shape[0]), dtype=np.int64)
                Tm = np.mod(C @ Tm, p) if T.shape[0] <= 64 else self._mulmod(C, Tm)
        else:
            T = self.M.tangent([Fraction(v) for v in x])
            if T is None:
                return False
            exact = [clear_denominators(v) for v in T]
            try:
                Tm = np.array([[_mod(to_fraction(c), p) for c in v] for v in T], dtype=np.int64).reshape(len(T), self.n)
            except ArithmeticError:
                return False
            if self.tangent_rank is None:
                self.tangent_rank = len(T)
        self._x.append(x)
        self._tmod.append(Tm)
        self._texact.append(exact)
        return True

    def _mulmod(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for s in range(0, A.shape[1], 64):
            out = np.mod(out + np.mod(A[:, s:s + 64] @ B[s:s + 64], self.p), self.p)
        return out

    def ensure_samples(self, count: int):
        tries = 0
        while len(self._x) < count:
            if not self._new_sample():
                tries += 1
                if tries > 50 + 10 * count:
                    raise NonConvergence("tangent oracle rejected too many sample points")

    def _rank_p(self, rows) -> int:
        rows = np.mod(np.asarray(rows, dtype=np.int64), self.p)
        if rows.size == 0:
            return 0
        return flint.nmod_mat(rows.shape[0], rows.shape[1], rows.ravel().tolist(), self.p).rank()

    def _reduce(self, basis: np.ndarray, new: np.ndarray) -> tuple[int, np.ndarray]:
        """Rank mod p of the stacked rows and a reduced basis of their span."""
        stack = np.vstack([basis, new]) if basis.size else new
        if stack.size == 0:
            return 0, stack
        M = flint.nmod_mat(stack.shape[0], stack.shape[1], np.mod(stack, self.p).ravel().tolist(), self.p)
        R, r = M.rref()
        ent = np.array([int(v) for v in R.entries()], dtype=np.int64).reshape(stack.shape)
        return r, ent[:r]

    def _powers(self, s: int, d: int) -> np.ndarray:
        pw = self._pow_cache.get(s)
        if pw is None or pw.shape[1] <= d:
            x = np.mod(np.array(self._x[s], dtype=np.int64), self.p)
            pw = np.ones((self.n, max(d, 6) + 1), dtype=np.int64)
            for a in range(1, pw.shape[1]):
                pw[:, a] = np.mod(pw[:, a - 1] * x, self.p)
            self._pow_cache[s] = pw
        return pw

    def _constraint_rows(self, E: np.ndarray, samples: range) -> np.ndarray:
        """Rows <grad m(x_s), t> mod p for monomials E and tangents t at the given samples."""
        p = self.p
        nchi, n = E.shape
        d = int(E[0].sum()) if nchi else 0
        cols = np.arange(n)[None, :]
        Em1 = np.maximum(E - 1, 0)
        out = []
        for s in samples:
            T = self._tmod[s]
            if T.shape[0] == 0:
                continue
            pw = self._powers(s, d)
            P = pw[cols, E]
            D = np.mod(pw[cols, Em1] * E, p)
            pre = np.ones((nchi, n + 1), dtype=np.int64)
            suf = np.ones((nchi, n + 1), dtype=np.int64)
            for i in range(n):
                pre[:, i + 1] = np.mod(pre[:, i] * P[:, i], p)
                suf[:, n - 1 - i] = np.mod(suf[:, n - i] * P[:, n - 1 - i], p)
            G = np.mod(np.mod(pre[:, :n] * suf[:, 1:], p) * D, p)
            out.append(np.mod(T @ G.T, p))
        if not out:
            return np.zeros((0, nchi), dtype=np.int64)
        return np.vstack(out)

    def _exact_constraint_rows(self, exps: Sequence[Exp], samples: range) -> list[list[int]]:
        rows = []
        for s in samples:
            x = self._x[s]
            G = []
            for e in exps:
                g = []
                for i in range(self.n):
                    if e[i] == 0:
                        g.append(0)
                        continue
                    v = e[i] * x[i] ** (e[i] - 1)
                    for j in range(self.n):
                        if j != i and e[j]:
                            v *= x[j] ** e[j]
                    g.append(v)
                G.append(g)
            for t in self._texact[s]:
                rows.append([sum(a * b for a, b in zip(t, g)) for g in G])
        return rows

    # products of atoms
    def _grouped_multisets(self, atoms: list[_Atom], d: int) -> dict[tuple[int, int], list[tuple[int, ...]]]:
        groups: dict[tuple[int, int], list[tuple[int, ...]]] = defaultdict(list)
        degs = [a.degree for a in atoms]
        mds = [a.md for a in atoms]
        bits = [a.bits for a in atoms]
        def rec(start, rem, md, bt, prefix):
            if rem == 0:
                groups[(md, bt)].append(prefix)
                return
            for i in range(start, len(atoms)):
                if degs[i] <= rem:
                    rec(i, rem - degs[i], md + mds[i], bt ^ bits[i], prefix + (i,))

        rec(0, d, 0, 0, ())
        return groups

    def _product(self, atoms, ms, memo) -> Polynomial:
        if ms in memo:
            return memo[ms]
        if not ms:
            val = Polynomial.constant(self.n)
        else:
            val = self._product(atoms, ms[:-1], memo) * atoms[ms[-1]].poly
        if len(ms) < 4:
            memo[ms] = val
        return val

    def _row_mod(self, poly: Polynomial, idx: dict[Exp, int], size: int) -> np.ndarray:
        row = np.zeros(size, dtype=np.int64)
        for e, c in poly.terms.items():
            j = idx.get(e)
            if j is None:
                raise AssertionError("product left its piece")
            row[j] = _mod(c, self.p)
        return row

    def _span_rank_p(self, atoms, msets, idx, size, stop: int, memo) -> tuple[int, list]:
        """Rank mod p of the products over msets (stopping at `stop`) and the products used."""
        basis = np.zeros((0, size), dtype=np.int64)
        rank = 0
        used = []
        pending = []
        for ms in msets:
            prod = self._product(atoms, ms, memo)
            used.append(prod)
            pending.append(self._row_mod(prod, idx, size))
            if len(pending) >= max(8, 2 * (stop - rank)):
                rank, basis = self._reduce(basis, np.array(pending))
                pending = []
                if rank >= stop:
                    break
        if pending:
            rank, basis = self._reduce(basis, np.array(pending))
        return rank, used

    # the per-degree computation
    def results(self, d: int) -> list[PieceResult]:
        if d in self._results:
            return self._results[d]
        memo: dict = {}
        groups = self._grouped_multisets(self._atoms, d) if d > 0 else {(0, 0): [()]}
        out = []
        for key, exps in sorted(self.pieces(d).items()):
            out.append(self._piece(d, key, exps, groups.get(key, []), memo))
        self._results[d] = out
        return out

    def _piece(self, d, key, exps, msets, memo) -> PieceResult:
        size = len(exps)
        idx = {e: i for i, e in enumerate(exps)}
        L, used = self._span_rank_p(self._atoms, msets, idx, size, size, memo)
        res = PieceResult(key[0], key[1], size, L, size, L, L, True, 0, "generators", tuple(exps), used)
        if L == size:
            return res
        E = np.array(exps, dtype=np.int64).reshape(size, self.n)
        blocks = []
        history = []
        s_used = 0
        while True:
            if (self.tangent_rank or 0) == 0:
                self.ensure_samples(1)
                res.upper = size
                break
            r = self.tangent_rank
            # enough rows for full rank at once, plus two spare samples
            batch = -(-(size - L) // r) + 2
            if s_used + batch > self.sample_cap:
                raise NonConvergence(f"degree {d}: more than {self.sample_cap} samples needed")
            self.ensure_samples(s_used + batch)
            blocks.append(self._constraint_rows(E, range(s_used, s_used + batch)))
            s_used += batch
            U = size - self._rank_p(np.vstack(blocks))
            res.upper = U
            res.samples = s_used
            if U == L:
                res.dim = L
                res.method = "bounds"
                return res
            history.append(U)
            if len(history) >= 2 and history[-1] == history[-2]:
                break
        return self._exact_piece(d, res, s_used)

    def _exact_piece(self, d: int, res: PieceResult, s_used: int) -> PieceResult:
        """Exact kernel for a piece whose bounds do not meet."""
        exps = list(res.exps)
        size = res.size
        r = max(self.tangent_rank or 0, 1)
        step = -(-size // r) + 2
        count = max(s_used, step)
        prev = None
        while True:
            self.ensure_samples(count)
            rows = self._exact_constraint_rows(exps, range(count)) if (self.tangent_rank or 0) else []
            K = _integer_kernel(rows, size)
            if prev is not None and len(K) == prev:
                ok = self._symbolic_check(exps, K)
                if ok is not False:
                    break
            prev = len(K)
            count += step
            if count > self.sample_cap:
                raise NonConvergence(f"degree {d}: exact kernel did not stabilise")
        res.kernel = K
        res.dim = len(K)
        res.samples = count
        res.certified = self._symbolic_check(exps, K) is True
        res.method = "exact-kernel" + ("" if res.certified else " (stabilised)")
        # exact rank of the generated part
        if res.products:
            cols = exps
            res.generated = len(echelon_rows([p.terms for p in res.products], cols))
        else:
            res.generated = 0
        if res.generated > res.dim:
            raise AssertionError("generated products exceed the basic space; oracle is inconsistent")
        return res

    def _symbolic_check(self, exps, K) -> bool | None:
        """True if every kernel vector is annihilated by every Lie generator, None without Lie data."""
        if self.M.lie is None:
            return None
        lin = []
        for X in self.M.lie:
            rows = X.tolist()
            lin.append([Polynomial.linear(r) for r in rows])
        for v in K:
            f = Polynomial(self.n, {e: c for e, c in zip(exps, v) if c})
            grads = f.gradient()
            for Xx in lin:
                tot = Polynomial(self.n)
                for gi, li in zip(grads, Xx):
                    if not gi.is_zero() and not li.is_zero():
                        tot = tot + gi * li
                if not tot.is_zero():
                    return False
        return True

    # exact bases
    def space(self, d: int) -> GradedSubspace:
        if d in self._spaces:
            return self._spaces[d]
        rows = []
        for res in self.results(d):
            rows += self._piece_rows(res)
        S = GradedSubspace.from_rows(self.n, d, rows)
        self._spaces[d] = S
        return S

    def _piece_rows(self, res: PieceResult) -> list[dict]:
        exps = list(res.exps)
        if res.dim == 0:
            return []
        if res.dim == res.size:
            return [{e: Fraction(1)} for e in exps]
        if res.kernel is not None:
            return echelon_rows([{e: c for e, c in zip(exps, v) if c} for v in res.kernel], exps)
        # certified by bounds: pick products independent mod p, then reduce exactly
        idx = {e: i for i, e in enumerate(exps)}
        mat = np.array([self._row_mod(p, idx, res.size) for p in res.products])
        chosen = _independent_rows_mod_p(mat, self.p)
        return echelon_rows([res.products[i].terms for i in chosen], exps)

    def span_dim(self, atoms: list[_Atom], d: int) -> int:
        """Exact dimension of the degree-d part of the algebra generated by piece-homogeneous atoms."""
        if d == 0:
            return 1
        groups = self._grouped_multisets(atoms, d)
        memo: dict = {}
        total = 0
        for res in self.results(d):
            msets = groups.get((res.md, res.bits), [])
            if not msets:
                continue
            exps = list(res.exps)
            idx = {e: i for i, e in enumerate(exps)}
            rank, used = self._span_rank_p(atoms, msets, idx, res.size, res.dim, memo)
            if rank < res.dim:
                rank = len(echelon_rows([p.terms for p in used], exps))
            total += rank
        return total


def _independent_rows_mod_p(mat: np.ndarray, p: int) -> list[int]:
    """Indices of a maximal set of rows independent mod p (first occurrences)."""
    if mat.size == 0:
        return []
    T = np.mod(mat.T, p)
    R, r = flint.nmod_mat(T.shape[0], T.shape[1], T.ravel().tolist(), p).rref()
    ent = np.array([int(v) for v in R.entries()], dtype=np.int64).reshape(T.shape)
    out = []
    for i in range(r):
        nz = np.nonzero(ent[i])[0]
        out.append(int(nz[0]))
    return out


def _integer_kernel(rows: list[list[int]], ncols: int) -> list[list[Fraction]]:
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    M = flint.fmpq_mat(flint.fmpz_mat(rows))
    return kernel_basis(Matrix(M))


def _engine(M: FoliationModel, seed: int = 0, sample_cap: int | None = None) -> _Engine:
    key = ("basic-engine", seed, sample_cap)
    eng = M._cache.get(key)
    if eng is None:
        eng = _Engine(M, seed, sample_cap)
        M._cache[key] = eng
    return eng


# public operations

@dataclass
class BasicSpace:
    """Basic polynomials of one degree, with the sampling record."""

    model: FoliationModel = field(repr=False)
    degree: int
    space: GradedSubspace = field(repr=False)
    samples: int
    certified: bool
    pieces: int

    @property
    def dim(self) -> int:
        return self.space.dim

    def basis(self) -> list[Polynomial]:
        return self.space.basis()

    def contains(self, f: Polynomial) -> bool:
        return self.space.contains(f)

    def complement_equations(self):
        return self.space.complement_equations()


def basic_space(M: FoliationModel, d: int, seed: int = 0, sample_cap: int | None = None) -> BasicSpace:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    eng = _engine(M, seed, sample_cap)
    res = eng.results(d)
    return BasicSpace(M, d, eng.space(d), max((r.samples for r in res), default=0),
                      all(r.certified for r in res), len(res))


def basic_dimension(M: FoliationModel, d: int, seed: int = 0, sample_cap: int | None = None) -> int:
    """Dimension only; skips building an exact basis."""
    return sum(r.dim for r in _engine(M, seed, sample_cap).results(d))


def member(f: Polynomial, B: BasicSpace) -> bool:
    return B.contains(f)


@dataclass
class F2Report:
    algebra: JordanAlgebra
    factors: list[SimpleFactor]

    def to_json(self) -> list[dict]:
        return [f.to_json() for f in self.factors]


def f2(M: FoliationModel, seed: int = 0, sample_cap: int | None = None) -> F2Report:
    """Jordan algebra of Hessians of degree-two basic polynomials, decomposed and classified."""
    B = basic_space(M, 2, seed, sample_cap)
    mats = [hessian_half(f) for f in B.basis()]
    J = JordanAlgebra(mats, check_closed=True)
    return F2Report(J, decompose(J, np.random.default_rng(seed)))


@dataclass
class FFTRow:
    degree: int
    generated: int
    basic: int
    equal: bool
    quadratic_generated: int
    certified: bool

    def to_json(self) -> dict:
        return {"degree": self.degree, "generated": self.generated, "basic": self.basic, "equal": self.equal,
                "quadratic_generated": self.quadratic_generated, "certified": self.certified}


def fft_check(M: FoliationModel, d_max: int, seed: int = 0, sample_cap: int | None = None,
              degree_cap: int = 6, dim_cap: int = 32) -> list[FFTRow]:
    """Compare the algebra generated by the model's generators with the basic space, degree by degree.

    ``generated`` is the span of products of the model generators;
    ``quadratic_generated`` is the span of products of all degree-two basic
    polynomials.
    """
    if d_max > degree_cap:
        raise ValueError(f"d_max {d_max} exceeds the degree cap {degree_cap}")
    if M.dim > dim_cap:
        raise ValueError(f"ambient dimension {M.dim} exceeds the cap {dim_cap}")
    eng = _engine(M, seed, sample_cap)
    rows = []
    quad_atoms = None
    gens = [g for g in M.generators if not g.is_zero() and g.degree() > 0]
    same = all(g.degree() == 2 for g in gens) and graded_span(gens, 2, M.dim).dim == basic_dimension(M, 2, seed, sample_cap)
    for d in range(d_max + 1):
        res = eng.results(d)
        basic = sum(r.dim for r in res)
        generated = 1 if d == 0 else sum(r.generated for r in res)
        if same:
            quad = generated
        elif d < 2:
            quad = 1 - d
        else:
            if quad_atoms is None:
                quad_atoms = eng._make_atoms(eng.space(2).basis())
            quad = eng.span_dim(quad_atoms, d)
        rows.append(FFTRow(d, generated, basic, generated == basic, quad, all(r.certified for r in res)))
    return rows


def _group_closure(gens: Sequence[Matrix], cap: int) -> list[Matrix]:
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].nrows
    I = Matrix.identity(n)
    seen = {I}
    order = [I]
    frontier = [I]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                k = h @ g
                if k not in seen:
                    seen.add(k)
                    order.append(k)
                    nxt.append(k)
                    if len(order) > cap:
                        raise GroupTooLarge(f"group has more than {cap} elements")
        frontier = nxt
    return order


def finite_group(gens: Sequence[Matrix], cap: int = 10000) -> list[Matrix]:
    """All elements of the group generated by finitely many matrices of finite order."""
    return _group_closure(list(gens), cap)


def reynolds(gens: Sequence[Matrix], f: Polynomial, cap: int = 10000) -> Polynomial:
    """Exact average of f over the finite group generated by gens."""
    G = finite_group(gens, cap)
    total = Polynomial(f.nvars)
    for g in G:
        total = total + pullback(g, f)
    return total.scale(Fraction(1, len(G)))


@dataclass
class TrivialReport:
    linear_forms: list[list[Fraction]]
    has_trivial_factor: bool

    @property
    def dim(self) -> int:
        return len(self.linear_forms)

    def to_json(self) -> dict:
        return {"dim": self.dim, "has_trivial_factor": self.has_trivial_factor,
                "directions": [[str(c) for c in v] for v in self.linear_forms]}


def trivial_factors(M: FoliationModel, seed: int = 0, sample_cap: int | None = None) -> TrivialReport:
    """Degree-one basic polynomials; their coefficient vectors span the trivial factor."""
    B = basic_space(M, 1, seed, sample_cap)
    vecs = []
    for f in B.basis():
        v = [Fraction(0)] * M.dim
        for e, c in f.terms.items():
            v[e.index(1)] = c
        vecs.append(v)
    return TrivialReport(span_basis(vecs) if vecs else [], bool(vecs))


@dataclass
class InvariantSpan:
    basis: list[list[Fraction]]
    idempotent: Polynomial
    invariant: bool


def invariant_span(M: FoliationModel, points: Sequence[Sequence], seed: int = 0,
                   sample_cap: int | None = None) -> InvariantSpan:
    """Span of leaf points, checked by membership of its idempotent in the degree-two basic space."""
    pts = [[to_fraction(c) for c in v] for v in points]
    basis = span_basis(pts) if pts else []
    e = idempotent_from_subspace(basis, M.dim)
    return InvariantSpan(basis, e, basic_space(M, 2, seed, sample_cap).contains(e))


def leaf_points(M: FoliationModel, x: Sequence, count: int, rng: np.random.Generator, bound: int = 2) -> list:
    """Exact points on the orbit through x for Lie-type models, via Cayley transforms of Lie elements."""
    if M.lie is None:
        raise ValueError("leaf sampling needs a Lie-type model")
    x = [to_fraction(c) for c in x]
    out = [x]
    I = Matrix.identity(M.dim)
    for _ in range(count - 1):
        X = Matrix.zeros(M.dim)
        for G in M.lie:
            X = X + G * int(rng.integers(-bound, bound + 1))
        g = (I - X).inverse() @ (I + X)
        out.append(g.apply(x))
    return out


__all__ = [
    "BasicSpace", "PieceResult", "NonConvergence", "GroupTooLarge", "F2Report", "FFTRow", "TrivialReport",
    "InvariantSpan", "basic_space", "basic_dimension", "member", "f2", "fft_check", "finite_group", "reynolds",
    "trivial_factors", "invariant_span", "leaf_points", "PRIME",
]
