"""Shared builders for the O(n) x O(n) block-form examples and random maps."""

from __future__ import annotations

import numpy as np

from folialg.core import Matrix

PRODUCT_22 = "product:(diag:R,2,1;diag:R,2,1)"


def scaled_orthogonal(rng: np.random.Generator, zero: bool = False) -> Matrix:
    """A random integer multiple of a 2x2 rotation or reflection (zero when asked)."""
    if zero:
        return Matrix.zeros(2)
    while True:
        a, b = (int(v) for v in rng.integers(-4, 5, size=2))
        if a or b:
            break
    if rng.integers(2):
        return Matrix([[a, -b], [b, a]])
    return Matrix([[a, b], [b, -a]])


def block(A, B, C, D) -> Matrix:
    return Matrix.block([[A, B], [C, D]])


def structured_forms(rng: np.random.Generator) -> dict[str, Matrix]:
    """The four into-shapes, the two onto-shapes among them, and two non-foliated shapes."""
    s = lambda: scaled_orthogonal(rng)
    Z = Matrix.zeros(2)
    generic = Matrix([[1, 2], [0, 1]])
    return {
        "0B0D": block(Z, s(), Z, s()),
        "0BC0": block(Z, s(), s(), Z),
        "A00D": block(s(), Z, Z, s()),
        "A0C0": block(s(), Z, s(), Z),
        "ABCD": block(s(), s(), s(), s()),
        "shear": block(generic, Z, Z, s()),
        "identity": Matrix.identity(4),
        "zero": Matrix.zeros(4),
    }


INTO_FORMS = ("0B0D", "0BC0", "A00D", "A0C0", "identity", "zero")
ONTO_FORMS = ("0BC0", "A00D", "identity", "zero")


def random_maps(rng: np.random.Generator, count: int) -> list[Matrix]:
    """Generic integer maps mixed with perturbations of foliated block forms."""
    out = []
    for i in range(count):
        if i % 2 == 0:
            out.append(Matrix([[int(v) for v in row] for row in rng.integers(-3, 4, size=(4, 4))]))
            continue
        forms = structured_forms(rng)
        phi = forms[("0B0D", "0BC0", "A00D", "A0C0")[i // 2 % 4]]
        rows = phi.tolist()
        if i % 4 == 1:
            r, c = (int(v) for v in rng.integers(0, 4, size=2))
            rows[r][c] += int(rng.integers(1, 3))
        out.append(Matrix(rows))
    return out


# acceptance reporting: one line per criterion, printed past pytest's capture
ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> bool:
    import sys
    line = f"acceptance {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print("\n" + line, file=sys.__stdout__, flush=True)
    return ok
