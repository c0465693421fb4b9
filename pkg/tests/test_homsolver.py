from __future__ import annotations

import numpy as np
import pytest

from folialg.core import Matrix
from folialg.homsolver import DimensionMismatch, check_variety, hom_equations, is_foliated
from folialg.models import parse_model
from support import INTO_FORMS, ONTO_FORMS, PRODUCT_22, block, random_maps, structured_forms


@pytest.fixture(scope="module")
def prod():
    return parse_model(PRODUCT_22)


@pytest.fixture(scope="module")
def varieties(prod):
    return hom_equations(prod, prod, "into"), hom_equations(prod, prod, "onto")


def blocks_of(phi):
    rows = phi.tolist()
    get = lambda r, c: Matrix([row[c:c + 2] for row in rows[r:r + 2]])
    return get(0, 0), get(0, 2), get(2, 0), get(2, 2)


def block_gram_conditions(phi) -> bool:
    A, B, C, D = blocks_of(phi)

    def is_scalar(X):
        G = (X.T @ X).tolist()
        return G[0][1] == 0 and G[1][0] == 0 and G[0][0] == G[1][1]

    return (A.T @ B).is_zero() and (C.T @ D).is_zero() and all(is_scalar(X) for X in (A, B, C, D))


def test_scalar_model_has_no_equations():
    M = parse_model("diag:R,1,1")
    H = hom_equations(M, M, "into")
    assert H.equations == [] and H.unknowns == 1
    assert check_variety(H, Matrix([[7]]))


def test_equations_match_block_gram_conditions(prod, varieties):
    into, _ = varieties
    rng = np.random.default_rng(11)
    maps = random_maps(rng, 60) + list(structured_forms(rng).values())
    for phi in maps:
        assert check_variety(into, phi) == block_gram_conditions(phi)


def test_equation_count(varieties):
    # two target generators of degree 2, each against the 10 - 2 complement equations
    into, onto = varieties
    assert len(into.equations) == 16
    assert len(onto.equations) == 32
    assert all(eq.degree() == 2 for eq in into.equations)


def test_structured_forms(prod, varieties):
    into, onto = varieties
    rng = np.random.default_rng(5)
    for _ in range(5):
        for name, phi in structured_forms(rng).items():
            assert is_foliated(prod, prod, phi, "into") == (name in INTO_FORMS), name
            assert is_foliated(prod, prod, phi, "onto") == (name in ONTO_FORMS), name
            assert check_variety(into, phi) == (name in INTO_FORMS)
            assert check_variety(onto, phi) == (name in ONTO_FORMS)


def test_is_foliated_examples(prod):
    assert is_foliated(prod, prod, Matrix.identity(4), "into")
    assert is_foliated(prod, prod, Matrix.identity(4), "onto")
    R = Matrix([[0, -1], [1, 0]])
    Z = Matrix.zeros(2)
    assert is_foliated(prod, prod, block(R * 2, Z, Z, R), "onto")
    phi = block(Z, R, Z, R * 3)
    assert is_foliated(prod, prod, phi, "into") and not is_foliated(prod, prod, phi, "onto")


def test_check_variety_examples(varieties):
    into, _ = varieties
    assert check_variety(into, Matrix.zeros(4))
    Z, I = Matrix.zeros(2), Matrix.identity(2)
    assert not check_variety(into, block(I, I, Z, Z))


def test_cross_validation_random(prod, varieties):
    into, onto = varieties
    for phi in random_maps(np.random.default_rng(3), 50):
        assert check_variety(into, phi) == is_foliated(prod, prod, phi, "into")
        assert check_variety(onto, phi) == is_foliated(prod, prod, phi, "onto")


def test_onto_inside_into(prod):
    for phi in random_maps(np.random.default_rng(4), 40):
        if is_foliated(prod, prod, phi, "onto"):
            assert is_foliated(prod, prod, phi, "into")


def test_monoid_on_samples(prod, varieties):
    into, _ = varieties
    rng = np.random.default_rng(8)
    assert check_variety(into, Matrix.identity(4))
    good = [phi for phi in random_maps(rng, 40) if check_variety(into, phi)]
    good += [f for n, f in structured_forms(rng).items() if n in INTO_FORMS]
    for a in good[:8]:
        for b in good[:8]:
            assert check_variety(into, a @ b)


def test_rectangular_maps():
    src, dst = parse_model("diag:R,2,1"), parse_model("diag:R,2,2")
    phi = Matrix([[1, 0], [0, 1], [0, 0], [0, 0]])
    assert is_foliated(src, dst, phi, "into")
    H = hom_equations(src, dst, "onto")
    assert check_variety(H, phi) == is_foliated(src, dst, phi, "onto")


def test_shape_errors(prod):
    with pytest.raises(DimensionMismatch):
        is_foliated(prod, prod, Matrix.identity(3))
    with pytest.raises(ValueError):
        hom_equations(prod, prod, "sideways")


def test_equation_json_names(varieties):
    into, _ = varieties
    data = into.to_json()
    assert data["rows"] == data["cols"] == 4 and len(data["equations"]) == 16
    assert "phi_0_0" in str(data["equations"])
