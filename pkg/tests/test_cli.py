from __future__ import annotations

import json

import numpy as np
import pytest

from folialg.cli import main
from folialg.clifford import build
from folialg.core import Matrix, cayley_orthogonal, kron, random_skew
from folialg.models import diagonal_jordan_basis
from support import PRODUCT_22


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_classify_clifford(capsys, tmp_path):
    path = write(tmp_path, "c31.json", [P.to_json() for P in build(3, 1).P])
    code, out, _ = run(capsys, "classify", "--input", path)
    assert code == 0 and "SpinFactor(4)" in out and "dim V_i = 8" in out


def test_classify_identity(capsys):
    code, out, _ = run(capsys, "classify", "--input", json.dumps([Matrix.identity(3).to_json()]))
    assert code == 0 and "RealHermitian(1), multiplicity 3" in out


def test_classify_conjugated_complex(capsys, tmp_path):
    basis = diagonal_jordan_basis("C", 2, 2)
    Q = cayley_orthogonal(random_skew(8, np.random.default_rng(4)))
    path = write(tmp_path, "h2c.json", [(Q @ B @ Q.T).to_json() for B in basis])
    code, out, _ = run(capsys, "classify", "--input", path)
    assert code == 0
    assert "SpinFactor(3) [isomorphic to ComplexHermitian(2)], multiplicity 2" in out


def test_classify_bad_input(capsys):
    assert run(capsys, "classify", "--input", "[[1,2]]")[0] == 2
    assert run(capsys, "classify", "--input", '[[["1","2"],["3","4"]]]')[0] == 2
    assert run(capsys, "classify", "--input", "/nonexistent/file.json")[0] == 2
    assert run(capsys, "classify")[0] == 2


def test_clifford_commands(capsys):
    code, out, _ = run(capsys, "clifford", "--m", "4", "--k", "1", "--verify")
    assert code == 0 and "relations: ok" in out
    code, out, _ = run(capsys, "clifford", "--m", "1", "--k", "1", "--psi", "[1,0]")
    assert code == 0 and out.strip() == "(1, 1, 0)"
    code, _, err = run(capsys, "clifford", "--m", "3", "--k", "1")
    assert code == 0 and "C_{3,1}: disconnected leaves" in err
    code, out, _ = run(capsys, "clifford", "--m", "2", "--k", "1", "--slice", "[1,1,0,0]")
    assert code == 0 and out.startswith("x = (1, 0, 0, 0")
    assert run(capsys, "clifford", "--m", "2", "--slice", "[1,2,0,0]")[0] == 2
    assert run(capsys, "clifford", "--m", "0")[0] == 2


def test_fft_commands(capsys):
    code, out, _ = run(capsys, "fft", "--model", "clifford:2,1", "--dmax", "4")
    assert code == 0 and out.strip().endswith("all equal")
    code, out, _ = run(capsys, "fft", "--model", "diag:R,2,2", "--dmax", "4")
    assert out.strip().endswith("all equal")
    code, out, _ = run(capsys, "fft", "--model", "so:3,3", "--dmax", "3")
    assert code == 0 and "gap found" in out
    line3 = [l for l in out.splitlines() if l.strip().startswith("3 ")][0]
    assert "gap 1" in line3
    assert run(capsys, "fft", "--model", "so:3,3", "--dmax", "3", "--expect-equal")[0] == 1
    assert run(capsys, "fft", "--model", "bogus")[0] == 2


def test_hom_commands(capsys, tmp_path):
    Z, R = Matrix.zeros(2), Matrix([[0, -1], [1, 0]])
    diag_form = Matrix.block([[R, Z], [Z, R * 2]])
    code, out, _ = run(capsys, "hom", "--source", PRODUCT_22, "--target", PRODUCT_22,
                       "--test", write(tmp_path, "phi.json", diag_form.to_json()))
    assert code == 0 and "onto: true" in out
    rank_def = Matrix.block([[Z, R], [Z, R]])
    code, out, _ = run(capsys, "hom", "--source", PRODUCT_22, "--target", PRODUCT_22,
                       "--test", json.dumps(rank_def.to_json()))
    assert out.strip() == "into: true, onto: false"
    code, out, _ = run(capsys, "hom", "--source", PRODUCT_22, "--target", PRODUCT_22)
    assert code == 0 and out.startswith("16 equations in 16 unknowns (into)")
    assert run(capsys, "hom", "--source", PRODUCT_22, "--target", PRODUCT_22, "--test", "[[1]]")[0] == 2


def test_hom_zero_map(capsys):
    # the zero map sends every leaf onto the leaf {0}; its transpose is zero as well
    code, out, _ = run(capsys, "hom", "--source", PRODUCT_22, "--target", PRODUCT_22,
                       "--test", json.dumps(Matrix.zeros(4).to_json()))
    assert code == 0 and out.strip() == "into: true, onto: true"


def test_moduli_command(capsys):
    code, out, _ = run(capsys, "moduli", "--model", "clifford:4,1")
    assert code == 0 and out.splitlines()[0] == "{0} ⊔ S^4 ⊔ {V}"


def test_symmetry_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "symmetry", "--model", "clifford:2,1", "--words", "10")
    assert code == 0 and "foliated: True" in out
    C = build(2, 1)
    U = write(tmp_path, "U.json", [[1, 0, 0, 0], [0, 1, 0, 0]])
    W = write(tmp_path, "W.json", [[1, 0, 1, 0], [0, 1, 0, 1]])
    assert all(C.P[1].apply(v) == v for v in [[1, 0, 1, 0], [0, 1, 0, 1]])
    code, out, _ = run(capsys, "symmetry", "--model", "clifford:2,1", "--witness", U, W)
    assert code == 0 and "maps U onto W: True" in out and "foliated (onto): True" in out
    assert "route eta" in out
    bad = write(tmp_path, "bad.json", [[1, 0, 0]])
    assert run(capsys, "symmetry", "--model", "clifford:2,1", "--witness", bad, W)[0] == 2


def test_trivial_command(capsys):
    code, out, _ = run(capsys, "trivial", "--model", "diag:R,2,2")
    assert code == 0 and out.strip() == "no trivial factor"
    code, out, _ = run(capsys, "trivial", "--model", "product:(diag:R,2,2;triv:1)")
    assert out.strip() == "trivial factor of dimension 1"


def test_json_format(capsys):
    code, out, _ = run(capsys, "fft", "--model", "diag:R,1,2", "--dmax", "2", "--format", "json")
    data = json.loads(out)
    assert data["all_equal"] and [r["degree"] for r in data["rows"]] == [0, 1, 2]


@pytest.mark.parametrize("argv", [
    ["classify", "--input", json.dumps([kron(Matrix.diag([1, 2]), Matrix.identity(2)).to_json()])],
    ["moduli", "--model", "product:(diag:R,2,1;clifford:2,1)", "--format", "json"],
    ["symmetry", "--model", "diag:R,2,2", "--words", "5", "--format", "json"],
])
def test_same_seed_same_bytes(capsys, argv):
    first = run(capsys, *argv, "--seed", "3")
    second = run(capsys, *argv, "--seed", "3")
    assert first == second
