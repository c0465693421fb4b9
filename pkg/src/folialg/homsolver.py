"""Polynomial equations for linear maps that take leaves into (or onto) leaves.

A linear map phi: V -> V' takes leaves into leaves exactly when the pullback
of every generator of the target lies in the basic space of the source.
Writing the entries of phi as indeterminates, the pullback of a degree-d
generator has coefficients that are degree-d polynomials in those entries,
and the linear equations cutting out the source basic space turn into
polynomial equations on phi.  Maps onto leaves are those where phi and its
transpose both take leaves into leaves.

Unknowns are ordered row-major: variable a * dim V + j is phi[a, j], named
``phi_a_j`` (zero-based).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .basicpoly import basic_space
from .core import Matrix
from .models import FoliationModel
from .polyring import Exp, Polynomial, pullback


class DimensionMismatch(ValueError):
    pass


MODES = ("into", "onto")


@dataclass
class HomVariety:
    source: FoliationModel = field(repr=False)
    target: FoliationModel = field(repr=False)
    mode: str
    equations: list[Polynomial]

    @property
    def rows(self) -> int:
        return self.target.dim

    @property
    def cols(self) -> int:
        return self.source.dim

    @property
    def unknowns(self) -> int:
        return self.rows * self.cols

    def names(self) -> list[str]:
        return [f"phi_{a}_{j}" for a in range(self.rows) for j in range(self.cols)]

    def to_json(self) -> dict:
        names = self.names()
        return {"mode": self.mode, "rows": self.rows, "cols": self.cols,
                "equations": [eq.to_json(names) for eq in self.equations]}


def _coefficient_polys(rho: Polynomial, n_in: int, n_out: int, transpose: bool) -> dict[Exp, Polynomial]:
    """Pullback of rho (on R^n_out) through a matrix of unknowns, split by x-monomial.

    The map has entries psi[a, j] (a < n_out, j < n_in).  Without
    ``transpose`` psi is phi itself, unknown a * n_in + j; with it psi is
    phi^T, whose entry psi[a, j] = phi[j, a] is unknown j * n_out + a.
    """
    nx = n_in
    nphi = n_in * n_out
    total = nx + nphi
    subs = []
    for a in range(n_out):
        lin = {}
        for j in range(n_in):
            e = [0] * total
            e[j] = 1
            u = j * n_out + a if transpose else a * n_in + j
            e[nx + u] = 1
            lin[tuple(e)] = 1
        subs.append(Polynomial(total, lin))
    composed = rho.compose(subs)
    out: dict[Exp, dict] = {}
    for e, c in composed.terms.items():
        out.setdefault(e[:nx], {})[e[nx:]] = c
    return {k: Polynomial(nphi, v) for k, v in out.items()}


def _equations(M: FoliationModel, gens: Sequence[Polynomial], n_out: int, transpose: bool,
               seed: int, sample_cap: int | None) -> list[Polynomial]:
    n_in = M.dim
    nphi = n_in * n_out
    eqs = []
    by_degree: dict[int, list] = {}
    for rho in gens:
        d = rho.degree()
        if d not in by_degree:
            by_degree[d] = basic_space(M, d, seed, sample_cap).complement_equations()
        coeffs = _coefficient_polys(rho, n_in, n_out, transpose)
        for ell in by_degree[d]:
            acc: dict = {}
            for q, w in ell.items():
                cp = coeffs.get(q)
                if cp is None:
                    continue
                for e, c in cp.terms.items():
                    acc[e] = acc.get(e, 0) + w * c
            poly = Polynomial(nphi, {e: c for e, c in acc.items() if c})
            if not poly.is_zero():
                eqs.append(poly)
    return eqs


def hom_equations(M: FoliationModel, Mp: FoliationModel, mode: str = "into", seed: int = 0,
                  sample_cap: int | None = None) -> HomVariety:
    """Equations on phi: V -> V' for taking leaves of M into (or onto) leaves of Mp."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    n, npr = M.dim, Mp.dim
    eqs = _equations(M, Mp.generators, npr, False, seed, sample_cap)
    if mode == "onto":
        # phi^T : V' -> V has entry (j, a) = phi[a, j]
        eqs += _equations(Mp, M.generators, n, True, seed, sample_cap)
    return HomVariety(M, Mp, mode, eqs)


def _check_shape(M: FoliationModel, Mp: FoliationModel, phi: Matrix):
    if phi.shape != (Mp.dim, M.dim):
        raise DimensionMismatch(f"map must be {Mp.dim} x {M.dim}, got {phi.shape[0]} x {phi.shape[1]}")


def is_foliated(M: FoliationModel, Mp: FoliationModel, phi: Matrix, mode: str = "into", seed: int = 0,
                sample_cap: int | None = None) -> bool:
    """Direct membership test of the pulled-back generators (and, for onto, of the transpose)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    _check_shape(M, Mp, phi)
    for rho in Mp.generators:
        if not basic_space(M, rho.degree(), seed, sample_cap).contains(pullback(phi, rho)):
            return False
    if mode == "onto":
        for rho in M.generators:
            if not basic_space(Mp, rho.degree(), seed, sample_cap).contains(pullback(phi.T, rho)):
                return False
    return True


def check_variety(Hv: HomVariety, phi: Matrix) -> bool:
    """Whether every equation vanishes at phi."""
    _check_shape(Hv.source, Hv.target, phi)
    vals = [v for row in phi.tolist() for v in row]
    return all(eq(vals) == 0 for eq in Hv.equations)


def phi_names(rows: int, cols: int) -> list[str]:
    return [f"phi_{a}_{j}" for a in range(rows) for j in range(cols)]


__all__ = ["HomVariety", "DimensionMismatch", "hom_equations", "is_foliated", "check_variety", "phi_names"]
