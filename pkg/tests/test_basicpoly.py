from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from folialg.basicpoly import (GroupTooLarge, NonConvergence, basic_dimension, basic_space, f2, fft_check,
                               finite_group, invariant_span, leaf_points, reynolds, trivial_factors)
from folialg.clifford import build, psi
from folialg.core import Matrix, kernel_basis
from folialg.jordan import jordan_product, same_subspace
from folialg.models import custom_model, determinant, parse_model
from folialg.polyring import Polynomial, graded_span, monomials, num_monomials, pullback


def naive_kernel_dims(M, d, batches, rng):
    """Kernel dimension of sampled gradient constraints after each batch, computed from scratch."""
    mons = monomials(M.dim, d)
    polys = [Polynomial(M.dim, {e: 1}) for e in mons]
    grads = [p.gradient() for p in polys]
    rows, dims = [], []
    for _ in range(batches):
        x = [Fraction(int(v)) for v in rng.integers(-9, 10, size=M.dim)]
        T = M.tangent(x)
        if T is None:
            continue
        for t in T:
            rows.append([sum(g[i](x) * t[i] for i in range(M.dim)) for g in grads])
        for D in M.discrete:
            y = D.apply(x)
            rows.append([p(y) - p(x) for p in polys])
        dims.append(len(kernel_basis(Matrix(rows))) if rows else len(mons))
    return dims


def test_basic_space_examples():
    assert basic_space(parse_model("diag:R,2,2"), 2).dim == 3
    for spec in ["diag:R,2,2", "clifford:2,1", "so:3,3"]:
        assert basic_space(parse_model(spec), 0).dim == 1
    B = basic_space(parse_model("so:3,3"), 3)
    assert B.dim >= 1 and B.contains(determinant(3, 3))
    assert basic_space(parse_model("diag:R,3,3"), 3).dim == 0


def test_negative_degree_rejected():
    with pytest.raises(ValueError):
        basic_space(parse_model("diag:R,1,1"), -1)


def test_nonconvergence_under_tiny_sample_cap():
    with pytest.raises(NonConvergence):
        basic_space(parse_model("clifford:2,1"), 4, sample_cap=1)


@pytest.mark.parametrize("spec,d", [("diag:R,2,2", 4), ("clifford:2,1", 4), ("diag:C,1,2", 3), ("so:2,2", 2),
                                    ("clifford:1,2", 4)])
def test_sampled_kernel_decreases_to_basic_dimension(spec, d):
    M = parse_model(spec)
    dims = naive_kernel_dims(M, d, 3 * num_monomials(M.dim, d) // max(1, M.dim) + 6, np.random.default_rng(1))
    assert all(a >= b for a, b in zip(dims, dims[1:]))
    assert dims[-1] == basic_space(M, d).dim


@pytest.mark.parametrize("spec", ["diag:R,2,2", "clifford:2,1", "so:2,2", "diag:H,1,2", "composed:3,1:circle",
                                  "product:(diag:R,2,1;clifford:1,1)"])
def test_basic_space_contains_generated_span(spec):
    M = parse_model(spec)
    for d in range(1, 5):
        B = basic_space(M, d)
        for p in graded_span(M.generators, d, M.dim).basis():
            assert B.contains(p)


def test_basic_dimension_matches_space():
    M = parse_model("diag:C,2,2")
    for d in range(5):
        assert basic_dimension(M, d) == basic_space(M, d).dim


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_f2_clifford(m):
    spec = f"clifford:{m},{2 if m == 1 else 1}"
    rep = f2(parse_model(spec))
    if m in (1, 3):
        # the adjoined refinement form enlarges the spin factor by one dimension
        assert [(f.kind, f.param) for f in rep.factors] == [("SpinFactor", m + 2)]
    else:
        assert [(f.kind, f.param) for f in rep.factors] == [("SpinFactor", m + 1)]


def test_f2_examples():
    rep = f2(parse_model("diag:H,1,2"))
    assert [(f.kind, f.param) for f in rep.factors] == [("SpinFactor", 5)]
    rep = f2(parse_model("product:(diag:R,2,1;diag:R,2,1)"))
    assert [(f.kind, f.param) for f in rep.factors] == [("RealHermitian", 1)] * 2
    assert (rep.factors[0].projector + rep.factors[1].projector).is_identity()


@pytest.mark.parametrize("spec", ["diag:R,2,3", "clifford:2,1", "diag:C,1,3", "product:(diag:R,1,2;clifford:2,1)"])
def test_f2_closed_under_jordan_product(spec):
    J = f2(parse_model(spec)).algebra
    for a in J.basis:
        for b in J.basis:
            assert J.contains(jordan_product(a, b))


def test_fft_examples():
    assert all(r.equal for r in fft_check(parse_model("clifford:2,1"), 4))
    assert all(r.equal for r in fft_check(parse_model("diag:R,2,2"), 4))
    rows = fft_check(parse_model("so:2,2"), 2)
    assert rows[2].basic - rows[2].generated == 1 and all(r.equal for r in rows[:2])


def test_fft_caps():
    with pytest.raises(ValueError):
        fft_check(parse_model("diag:R,1,1"), 7)
    with pytest.raises(ValueError):
        fft_check(parse_model("triv:33"), 2)


def test_fft_row_json():
    row = fft_check(parse_model("diag:R,1,2"), 2)[2]
    assert row.to_json()["degree"] == 2 and set(row.to_json()) >= {"generated", "basic", "equal"}


def signed_permutations_2():
    return [Matrix([[0, 1], [1, 0]]), Matrix.diag([-1, 1])]


def test_reynolds_examples():
    x1, x2 = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    G = signed_permutations_2()
    assert len(finite_group(G)) == 8
    f = x1 * x1 + x2 * x2
    assert reynolds(G, f) == f
    assert reynolds([Matrix([[-1]])], Polynomial.variable(0, 1)).is_zero()
    assert reynolds(G, x1 * x1) == (x1 * x1 + x2 * x2).scale(Fraction(1, 2))


def test_group_too_large():
    rot = Matrix([[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]])
    with pytest.raises(GroupTooLarge):
        finite_group([rot], cap=200)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(monomials(2, 3) + monomials(2, 4)), st.integers(-5, 5)), max_size=6))
def test_reynolds_idempotent_and_invariant(terms):
    f = Polynomial(2, {})
    for e, c in terms:
        f = f + Polynomial(2, {e: c})
    G = signed_permutations_2()
    r = reynolds(G, f)
    assert reynolds(G, r) == r
    assert all(pullback(g, r) == r for g in G)


def test_trivial_examples():
    assert trivial_factors(parse_model("diag:R,2,2")).dim == 0
    x = [Polynomial.variable(i, 3) for i in range(3)]
    M = custom_model([x[0] * x[0] + x[1] * x[1], x[2]])
    rep = trivial_factors(M)
    assert rep.dim == 1 and rep.has_trivial_factor and rep.linear_forms[0][:2] == [0, 0]
    for spec in ["clifford:1,1", "clifford:2,1", "clifford:4,1"]:
        assert trivial_factors(parse_model(spec)).dim == 0


def test_invariant_span_examples():
    M = parse_model("diag:R,2,2")
    res = invariant_span(M, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert res.invariant and len(res.basis) == 4
    pts = leaf_points(M, [1, 0, 0, 0], 6, np.random.default_rng(0))
    res = invariant_span(M, pts)
    assert res.invariant and same_subspace(res.basis, [[1, 0, 0, 0], [0, 1, 0, 0]])
    bad = invariant_span(M, [[1, 0, 0, 0]])
    assert not bad.invariant


def test_invariant_span_clifford_leaf():
    C = build(2, 1)
    M = parse_model("clifford:2,1")
    # points on the leaf psi = (1, 1, 0, 0): the unit sphere of the +1 eigenspace of P_0
    pts = [[1, 0, 0, 0], [0, 1, 0, 0], [Fraction(3, 5), Fraction(4, 5), 0, 0]]
    assert all(psi(C, p) == [1, 1, 0, 0] for p in pts)
    res = invariant_span(M, pts)
    assert res.invariant and len(res.basis) == C.l
    pts = [[1, 0, 0, 0], [Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)]]
    res = invariant_span(M, pts)
    assert len(res.basis) == 2 and not res.invariant
