"""Clifford systems P_0..P_m on R^{2l} and their quadratic leaf maps.

Systems are built in block form

    P_0 = diag(I, -I),   P_1 = [[0, I], [I, 0]],   P_i = [[0, E_i], [-E_i, 0]]  (i >= 2)

where E_2..E_m are skew, square to -I and pairwise anticommute.  The E_i
are tensor words in the real 2x2 matrices I, X = [[0,1],[1,0]],
Z = diag(1,-1) and Y = [[0,-1],[1,0]].  A word is skew with square -I
exactly when it contains an odd number of Y letters, and two words
anticommute exactly when the number of positions holding two different
non-identity letters is odd.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .core import Matrix, exact_sqrt, kernel_basis, kron, to_fraction
from .jordan import delta
from .polyring import Polynomial, quad_form

log = logging.getLogger(__name__)

_LETTERS = {
    "I": Matrix([[1, 0], [0, 1]]),
    "X": Matrix([[0, 1], [1, 0]]),
    "Z": Matrix([[1, 0], [0, -1]]),
    "Y": Matrix([[0, -1], [1, 0]]),
}

# (m, l) pairs whose generic level sets of the leaf map are disconnected
DISCONNECTED_CASES = {(1, 1), (1, 2), (3, 4), (7, 8)}


class CliffordError(ValueError):
    pass


class InvalidParams(CliffordError):
    pass


class DisconnectedLeavesWarning(UserWarning):
    """Level sets of the leaf map are disconnected for this (m, l)."""


def _anticommute(w1: str, w2: str) -> bool:
    clash = sum(1 for a, b in zip(w1, w2) if a != "I" and b != "I" and a != b)
    return clash % 2 == 1


def _complex_structure(w: str) -> bool:
    return w.count("Y") % 2 == 1


@lru_cache(maxsize=None)
def _all_words(q: int) -> tuple[str, ...]:
    if q == 0:
        return ("",)
    return tuple(a + w for a in "IXZY" for w in _all_words(q - 1))


def _search_words(count: int, q: int, prefix: tuple[str, ...] = ()) -> tuple[str, ...] | None:
    """Deterministic backtracking for `count` pairwise anticommuting complex-structure words."""
    candidates = [w for w in _all_words(q) if _complex_structure(w)]

    def rec(chosen: tuple[str, ...], start: int):
        if len(chosen) == count:
            return chosen
        for idx in range(start, len(candidates)):
            w = candidates[idx]
            if all(_anticommute(w, c) for c in chosen):
                res = rec(chosen + (w,), idx + 1)
                if res is not None:
                    return res
        return None

    if not all(_anticommute(a, b) for i, a in enumerate(prefix) for b in prefix[i + 1:]):
        return None
    if count <= len(prefix):
        return prefix[:count]
    return rec(prefix, 0)


@lru_cache(maxsize=None)
def clifford_words(m: int) -> tuple[int, tuple[str, ...]]:
    """Smallest q and words for E_2..E_m acting on R^(2^q)."""
    need = max(m - 1, 0)
    q = 0
    while True:
        words = _search_words(need, q)
        if words is not None:
            return q, words
        q += 1


def word_matrix(w: str) -> Matrix:
    out = Matrix([[1]])
    for a in w:
        out = kron(out, _LETTERS[a])
    return out


@dataclass
class CliffordSystem:
    m: int
    l: int
    P: list[Matrix]
    words: tuple[str, ...] | None = field(default=None, repr=False)
    multiplicity: int | None = None

    @property
    def dim(self) -> int:
        return 2 * self.l

    @property
    def disconnected(self) -> bool:
        return (self.m, self.l) in DISCONNECTED_CASES

    def to_json(self) -> dict:
        return {"m": self.m, "l": self.l, "P": [p.to_json() for p in self.P]}

    @classmethod
    def from_json(cls, data: dict) -> "CliffordSystem":
        P = [Matrix.from_json(p) for p in data["P"]]
        C = cls(int(data["m"]), int(data["l"]), P)
        rep = verify_relations(C)
        if not rep.ok:
            raise CliffordError("; ".join(rep.failures[:5]))
        return C


def build(m: int, k: int = 1) -> CliffordSystem:
    """Clifford system with m+1 matrices on R^{2l}, l = k * delta(m)."""
    if m < 1 or k < 1:
        raise InvalidParams("need m >= 1 and k >= 1")
    q, words = clifford_words(m)
    l0 = 2 ** q
    if l0 != delta(m):
        raise CliffordError(f"word search gave dimension {l0}, expected {delta(m)}")
    l = k * l0
    Ik = Matrix.identity(k)
    Il = Matrix.identity(l)
    P = [Matrix.block_diag(Il, -Il)]
    if m >= 1:
        P.append(Matrix.block([[None, Il], [Il, None]]))
    for w in words:
        E = kron(Ik, word_matrix(w))
        P.append(Matrix.block([[None, E], [-E, None]]))
    C = CliffordSystem(m, l, P, words, k)
    if C.disconnected:
        warnings.warn(f"level sets of the leaf map are disconnected for m={m}, l={l}", DisconnectedLeavesWarning,
                      stacklevel=2)
        log.info("Clifford system m=%d l=%d has disconnected level sets", m, l)
    return C


@dataclass
class RelationReport:
    ok: bool
    failures: list[str]
    checked: int

    def __bool__(self) -> bool:
        return self.ok


def verify_relations(C: CliffordSystem) -> RelationReport:
    """Exact check of symmetry and P_i P_j + P_j P_i = 2 delta_ij I."""
    failures = []
    n = 2 * C.l
    if len(C.P) != C.m + 1:
        failures.append(f"expected {C.m + 1} matrices, got {len(C.P)}")
    I2 = Matrix.identity(n) * 2
    Z = Matrix.zeros(n)
    checked = 0
    for i, Pi in enumerate(C.P):
        if Pi.shape != (n, n):
            failures.append(f"P{i} has shape {Pi.shape}")
            continue
        if not Pi.is_symmetric():
            failures.append(f"P{i} is not symmetric")
        for j in range(i, len(C.P)):
            Pj = C.P[j]
            if Pj.shape != (n, n):
                continue
            checked += 1
            s = Pi @ Pj + Pj @ Pi
            if s != (I2 if i == j else Z):
                failures.append(f"P{i}P{j} + P{j}P{i} != {'2I' if i == j else '0'}")
    return RelationReport(not failures, failures, checked)


def psi_polynomials(C: CliffordSystem) -> list[Polynomial]:
    """|x|^2 followed by <P_i x, x>."""
    return [quad_form(Matrix.identity(2 * C.l))] + [quad_form(P) for P in C.P]


def psi(C: CliffordSystem, x: Sequence):
    """Leaf map value; exact for exact input."""
    if len(x) != 2 * C.l:
        raise CliffordError("point has the wrong dimension")
    return [f(x) for f in psi_polynomials(C)]


def image_membership(C: CliffordSystem, y: Sequence, tol: float = 1e-9) -> bool:
    """Whether y lies in the image of the leaf map.

    The image is y_1 >= 0 with y_1^2 >= sum of the remaining squares, and
    equality when m = l.
    """
    if len(y) != C.m + 2:
        raise CliffordError("value has the wrong dimension")
    exact = all(not isinstance(v, float) for v in y)
    if exact:
        y = [to_fraction(v) for v in y]
        tol = 0
    y1 = y[0]
    gap = y1 * y1 - sum(v * v for v in y[1:])
    if y1 < -tol:
        return False
    if C.m < C.l:
        return gap >= -tol
    return abs(gap) <= tol


def _sqrt(x):
    r = exact_sqrt(x) if not isinstance(x, float) else None
    if r is not None:
        return r, True
    return math.sqrt(max(float(x), 0.0)), False


def slice_point(C: CliffordSystem, y: Sequence, tol: float = 1e-9):
    """A point x with psi(x) = y, built inside the standard slice.

    Write x = (u, w) with u = lam v0 and
    w = a_1 v0 + sum_{i>=2} a_i E_i v0 + mu v1, where v0 = e_1 and v1 is a
    unit vector orthogonal to every E_i v0.  Then psi_2 = lam^2 - |a|^2 - mu^2,
    psi_3 = 2 lam a_1 and psi_{i+2} = -2 lam a_i for i >= 2.  When
    y_1 + y_2 = 0 the point (0, sqrt(y_1) v0) is used.

    Returns exact Fractions when every square root involved is rational.
    """
    if not image_membership(C, y, tol):
        raise CliffordError("value is outside the image of the leaf map")
    exact_in = all(not isinstance(v, float) for v in y)
    y = [to_fraction(v) for v in y] if exact_in else [float(v) for v in y]
    l = C.l
    zero = Fraction(0) if exact_in else 0.0
    u = [zero] * l
    w = [zero] * l
    y1, y2 = y[0], y[1]
    s = y1 + y2
    if (exact_in and s == 0) or (not exact_in and abs(s) <= tol):
        mu, ex = _sqrt((y1 - y2) / 2)
        w[0] = mu
        exact = exact_in and ex
    else:
        lam, ex1 = _sqrt(s / 2)
        rest = sum((v * v for v in y[2:]), zero)
        mu2 = (y1 * y1 - y2 * y2 - rest) / (2 * s)
        if not exact_in and mu2 < tol:
            mu2 = 0.0
        mu, ex2 = _sqrt(mu2)
        exact = exact_in and ex1 and ex2
        u[0] = lam
        alphas = []
        if C.m >= 1:
            alphas.append(y[2] / (2 * lam))
        for i in range(2, C.m + 1):
            alphas.append(-y[i + 1] / (2 * lam))
        # w = a_1 v0 + sum a_i E_i v0 + mu v1
        w[0] += alphas[0] if alphas else zero
        used = {0}
        for i, a in enumerate(alphas[1:], start=2):
            E = _E(C, i)
            col = E.col(0)
            for r, c in enumerate(col):
                if c:
                    w[r] += a * c
                    used.add(r)
        if mu2 != 0:
            free = [r for r in range(l) if r not in used]
            if not free:
                raise CliffordError("no room for the orthogonal direction (m = l with y off the cone)")
            w[free[0]] += mu
    x = u + w
    if not exact:
        x = [float(v) for v in x]
    return x


def _E(C: CliffordSystem, i: int) -> Matrix:
    """Upper-right block of P_i (i >= 2)."""
    P = C.P[i]
    l = C.l
    return P.submatrix(list(range(l)), list(range(l, 2 * l)))


def leaf_tangent(C: CliffordSystem, x: Sequence) -> list[list[Fraction]]:
    """Exact kernel of the Jacobian of the leaf map at x."""
    x = [to_fraction(v) for v in x]
    rows = [x] + [P.apply(x) for P in C.P]
    return kernel_basis(Matrix(rows))


def refinement_matrix(C: CliffordSystem) -> Matrix | None:
    """A symmetric involution anticommuting with every P_i, when one exists in the same word family.

    For the disconnected cases with m + 1 = l its quadratic form separates
    the two components of a generic level set.
    """
    l = C.l
    if l & (l - 1):
        return None
    q = l.bit_length() - 1
    words = C.words
    if words is None:
        return None
    base_q = len(words[0]) if words else 0
    k = l // (2 ** base_q)
    # lift existing words to length q by tensoring with identities on the left (k copies)
    extra = q - base_q
    if 2 ** extra != k:
        return None
    lifted = tuple("I" * extra + w for w in words)
    found = _search_words(len(lifted) + 1, q, lifted)
    if found is None:
        return None
    E = word_matrix(found[-1])
    Om = Matrix.block([[None, E], [-E, None]])
    for P in C.P:
        if not (Om @ P + P @ Om).is_zero():
            return None
    return Om


__all__ = [
    "CliffordSystem", "CliffordError", "InvalidParams", "DisconnectedLeavesWarning", "RelationReport", "DISCONNECTED_CASES", "build",
    "verify_relations", "psi", "psi_polynomials", "image_membership", "slice_point", "leaf_tangent",
    "refinement_matrix", "clifford_words", "word_matrix", "delta",
]
