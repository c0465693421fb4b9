"""Command-line interface.

Exit codes: 0 success, 1 a property check came out negative, 2 bad input,
3 internal failure (with a diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from . import clifford as cl
from .basicpoly import f2, fft_check, trivial_factors
from .core import ExactnessError, Matrix, fraction_str, to_fraction
from .homsolver import DimensionMismatch, check_variety, hom_equations, is_foliated
from .jordan import JordanError, close, decompose
from .models import ModelError, parse_model
from .symmetry import (NotInFactor, NotSameDimension, UnsupportedType, is_orthogonal_involution, moduli_report,
                       orthogonal_hessians, transitivity_witness, verify_foliated_symmetries)

log = logging.getLogger("folialg")

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    seed: int = 0
    tol: float = 1e-9
    dmax: int = 4
    sample_cap: int | None = None
    fmt: str = "text"


def _config(args) -> RunConfig:
    return RunConfig(args.seed, args.tol, args.dmax, args.sample_cap, args.format)


def _load_json(arg: str) -> Any:
    """A JSON literal, or the contents of a JSON file."""
    text = arg.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        with open(arg) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {arg!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{arg!r} is not valid JSON: {exc}") from exc


def _vector(data) -> list[Fraction]:
    if not isinstance(data, list) or not data:
        raise InputError("expected a non-empty list of numbers")
    try:
        return [to_fraction(x) if not isinstance(x, float) else to_fraction(str(x)) for x in data]
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"bad vector entry: {exc}") from exc


def _vectors(data) -> list[list[Fraction]]:
    if not isinstance(data, list):
        raise InputError("expected a list of vectors")
    return [_vector(v) for v in data]


def _matrix(data) -> Matrix:
    try:
        return Matrix.from_json(data)
    except (ValueError, TypeError, ZeroDivisionError, ExactnessError) as exc:
        raise InputError(f"bad matrix: {exc}") from exc


def _fmt(x) -> str:
    return fraction_str(x) if isinstance(x, Fraction) else str(x)


def _emit(cfg: RunConfig, payload: dict, text: str):
    if cfg.fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def _model(spec: str):
    try:
        return parse_model(spec)
    except ModelError as exc:
        raise InputError(str(exc)) from exc


# commands

def cmd_classify(args, cfg: RunConfig) -> int:
    data = _load_json(args.input)
    if isinstance(data, dict) and "matrices" in data:
        data = data["matrices"]
    if not isinstance(data, list) or not data:
        raise InputError("input must be a non-empty list of symmetric matrices")
    mats = [_matrix(m) for m in data]
    n = mats[0].nrows
    if any(m.shape != (n, n) or not m.is_symmetric() for m in mats):
        raise InputError("every matrix must be symmetric of one common size")
    J = close(mats)
    factors = decompose(J, np.random.default_rng(cfg.seed))
    lines = [f"Jordan closure: dimension {J.dim} on R^{n}"]
    for f in factors:
        note = f" [{f.note}]" if f.note else ""
        lines.append(f"{f.name}{note}, multiplicity {f.multiplicity}, dim V_i = {f.subspace_dim}")
    _emit(cfg, {"dim": J.dim, "n": n, "factors": [f.to_json() for f in factors]}, "\n".join(lines))
    return EXIT_OK


def cmd_clifford(args, cfg: RunConfig) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", cl.DisconnectedLeavesWarning)
        C = cl.build(args.m, args.k)
    if C.disconnected:
        print(f"warning: C_{{{args.m},{args.k}}}: disconnected leaves", file=sys.stderr)
    if args.verify:
        rep = cl.verify_relations(C)
        text = f"relations: {'ok' if rep.ok else 'FAILED'} ({rep.checked} products checked)"
        if rep.failures:
            text += "\n" + "\n".join(rep.failures)
        _emit(cfg, {"ok": rep.ok, "checked": rep.checked, "failures": rep.failures}, text)
        return EXIT_OK if rep.ok else EXIT_VIOLATION
    if args.psi is not None:
        x = _vector(_load_json(args.psi))
        try:
            y = cl.psi(C, x)
        except cl.CliffordError as exc:
            raise InputError(str(exc)) from exc
        _emit(cfg, {"psi": [_fmt(v) for v in y]}, "(" + ", ".join(_fmt(v) for v in y) + ")")
        return EXIT_OK
    if args.slice is not None:
        y = _vector(_load_json(args.slice))
        try:
            x = cl.slice_point(C, y, cfg.tol)
        except cl.CliffordError as exc:
            raise InputError(str(exc)) from exc
        back = cl.psi(C, x)
        exact = all(isinstance(v, Fraction) for v in x)
        _emit(cfg, {"x": [_fmt(v) for v in x], "exact": exact, "psi": [_fmt(v) for v in back]},
              "x = (" + ", ".join(_fmt(v) for v in x) + ")" + ("" if exact else "  [float]"))
        return EXIT_OK
    text = f"Clifford system m={C.m}, l={C.l}, words {list(C.words or ())}"
    _emit(cfg, {"m": C.m, "l": C.l, "words": list(C.words or ()), "disconnected": C.disconnected,
                "P": [p.to_json() for p in C.P]}, text)
    return EXIT_OK


def cmd_fft(args, cfg: RunConfig) -> int:
    M = _model(args.model)
    rows = fft_check(M, cfg.dmax, cfg.seed, cfg.sample_cap)
    lines = [f"model {M.provenance}", "degree  generated  basic  quadratic  verdict"]
    for r in rows:
        verdict = "equal" if r.equal else f"gap {r.basic - r.generated}"
        lines.append(f"{r.degree:>6}  {r.generated:>9}  {r.basic:>5}  {r.quadratic_generated:>9}  {verdict}")
    all_equal = all(r.equal for r in rows)
    lines.append("all equal" if all_equal else "gap found")
    _emit(cfg, {"model": M.provenance, "rows": [r.to_json() for r in rows], "all_equal": all_equal},
          "\n".join(lines))
    if args.expect_equal and not all_equal:
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_hom(args, cfg: RunConfig) -> int:
    M, Mp = _model(args.source), _model(args.target)
    if args.test is not None:
        phi = _matrix(_load_json(args.test))
        try:
            verdict = {m: is_foliated(M, Mp, phi, m, cfg.seed, cfg.sample_cap) for m in ("into", "onto")}
        except DimensionMismatch as exc:
            raise InputError(str(exc)) from exc
        # the equations must agree with the direct membership test
        for m in ("into", "onto"):
            if check_variety(hom_equations(M, Mp, m, cfg.seed, cfg.sample_cap), phi) != verdict[m]:
                print(f"error: equations and membership disagree in {m} mode", file=sys.stderr)
                return EXIT_INTERNAL
        text = f"into: {str(verdict['into']).lower()}, onto: {str(verdict['onto']).lower()}"
        _emit(cfg, verdict, text)
        return EXIT_OK
    Hv = hom_equations(M, Mp, args.mode, cfg.seed, cfg.sample_cap)
    names = Hv.names()
    lines = [f"{len(Hv.equations)} equations in {Hv.unknowns} unknowns ({args.mode})"]
    lines += [_poly_text(eq, names) for eq in Hv.equations]
    payload = Hv.to_json()
    payload["count"] = len(Hv.equations)
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK


def _poly_text(p, names) -> str:
    terms = []
    for e, c in sorted(p.terms.items(), reverse=True):
        mono = "*".join(f"{names[i]}^{k}" if k > 1 else names[i] for i, k in enumerate(e) if k)
        terms.append(f"{_fmt(c)}*{mono}" if mono else _fmt(c))
    return " + ".join(terms) + " = 0"


def cmd_moduli(args, cfg: RunConfig) -> int:
    M = _model(args.model)
    rep = moduli_report(f2(M, cfg.seed, cfg.sample_cap))
    lines = [rep.text()]
    for e in rep.entries:
        lines.append(f"  {e.factor}: dimensions {e.dimensions}")
    _emit(cfg, rep.to_json(), "\n".join(lines))
    return EXIT_OK


def _factor_of(report, U):
    for fac in report.factors:
        P = fac.projector
        if U and all(P.apply(u) == list(u) for u in U):
            return fac
    raise InputError("subspace does not lie in a single isotypical component")


def cmd_symmetry(args, cfg: RunConfig) -> int:
    M = _model(args.model)
    rep = f2(M, cfg.seed, cfg.sample_cap)
    if args.witness:
        U = _vectors(_load_json(args.witness[0]))
        W = _vectors(_load_json(args.witness[1]))
        if any(len(v) != M.dim for v in U + W):
            raise InputError(f"vectors must have length {M.dim}")
        fac = _factor_of(rep, U)
        try:
            w = transitivity_witness(fac, U, W, M, cfg.seed)
        except NotSameDimension as exc:
            raise InputError(str(exc)) from exc
        except (UnsupportedType, NotInFactor) as exc:
            raise InputError(str(exc)) from exc
        transcript = [f"factor {fac.name}", f"route {w.route}", f"maps U onto W: {w.maps_subspace}",
                      f"foliated (onto): {w.foliated}", f"isometry: {w.isometry}"]
        if w.scale_squared is not None:
            transcript.append(f"g^T g = {_fmt(w.scale_squared)} on the factor")
        payload = w.to_json()
        payload["transcript"] = transcript
        _emit(cfg, payload, "\n".join(transcript + ["g = " + json.dumps(w.matrix.to_json())]))
        return EXIT_OK if w.verified else EXIT_VIOLATION
    gens = orthogonal_hessians(rep)
    invol = all(is_orthogonal_involution(g) for g in gens)
    chk = verify_foliated_symmetries(M, gens, args.words, 6, cfg.seed)
    lines = [f"{len(gens)} orthogonal Hessian generators, involutions: {invol}",
             f"generators and {chk.words} random words foliated: {chk.ok}"]
    lines += chk.failures
    _emit(cfg, {"generators": [g.to_json() for g in gens], "involutions": invol, "check": chk.to_json()},
          "\n".join(lines))
    return EXIT_OK if invol and chk.ok else EXIT_VIOLATION


def cmd_trivial(args, cfg: RunConfig) -> int:
    M = _model(args.model)
    rep = trivial_factors(M, cfg.seed, cfg.sample_cap)
    text = f"trivial factor of dimension {rep.dim}" if rep.has_trivial_factor else "no trivial factor"
    _emit(cfg, rep.to_json(), text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all sampled randomness")
    common.add_argument("--tol", type=float, default=1e-9, help="float tolerance (float paths only)")
    common.add_argument("--dmax", type=int, default=4, help="largest degree for fft")
    common.add_argument("--sample-cap", type=int, default=None, help="cap on oracle samples per degree")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="folialg", description="Exact computations with infinitesimal foliations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="close, decompose and classify symmetric matrices")
    s.add_argument("--input", required=True, help="JSON list of symmetric matrices (file or literal)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("clifford", parents=[common], help="build a Clifford system")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--k", type=int, default=1)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--verify", action="store_true")
    g.add_argument("--psi", help="point x (JSON file or literal)")
    g.add_argument("--slice", help="value y (JSON file or literal)")
    s.set_defaults(func=cmd_clifford)

    s = sub.add_parser("fft", parents=[common], help="compare generated and basic dimensions by degree")
    s.add_argument("--model", required=True)
    s.add_argument("--expect-equal", action="store_true", help="exit 1 when a degree shows a gap")
    s.set_defaults(func=cmd_fft)

    s = sub.add_parser("hom", parents=[common], help="equations for foliated linear maps")
    s.add_argument("--source", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--mode", choices=("into", "onto"), default="into")
    s.add_argument("--test", help="a map phi (matrix JSON file or literal) to test")
    s.set_defaults(func=cmd_hom)

    s = sub.add_parser("moduli", parents=[common], help="moduli of invariant subspaces")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_moduli)

    s = sub.add_parser("symmetry", parents=[common], help="orthogonal Hessian symmetries and witnesses")
    s.add_argument("--model", required=True)
    s.add_argument("--witness", nargs=2, metavar=("U", "W"), help="two invariant subspaces (JSON vector lists)")
    s.add_argument("--words", type=int, default=50)
    s.set_defaults(func=cmd_symmetry)

    s = sub.add_parser("trivial", parents=[common], help="detect a trivial factor")
    s.add_argument("--model", required=True)
    s.set_defaults(func=cmd_trivial)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    cfg = _config(args)
    try:
        return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except JordanError as exc:
        print(f"classification failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
