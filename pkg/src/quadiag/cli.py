"""
Command line front end.

    quadiag diagonalize problem.json [--emit-transform] [--allow-partial] [-o report.json]
    quadiag check problem.json
    quadiag corpus [filter] [--fixtures fixtures.json]

Problem files are JSON objects with a ``kind`` and the matrices of that
kind.  Matrix entries are numbers or ``[re, im]`` pairs.  Exit codes: 0 on
success (diagonalized, partial, or physically diagonalizable), 2 when the
form is not diagonalizable, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .bv import verify
from .core import (
    BosonForm,
    CoordForm,
    FermionForm,
    NotDiagonalizable,
    PairingForm,
    QuadiagError,
    QuadraticForm,
    Tolerances,
    form_kind,
)
from .corpus import ModelSpec, generate, model_options, run_fixture, select_fixtures
from .dynamics import dynamic_matrix
from .pipeline import diagonalize
from .spectral import COMPLEX, DEFECTIVE, PHYSICAL, classify

EXIT_OK, EXIT_ERROR, EXIT_NOT_DIAGONALIZABLE = 0, 1, 2

KINDS = ("boson", "fermion", "pairing-bose", "pairing-fermi", "coord", "model")
CHECK_WORDS = {PHYSICAL: "physically-diagonalizable", COMPLEX: "complex-spectrum", DEFECTIVE: "defective"}
TOLERANCE_KEYS = ("real", "rank", "orth")


class ParseError(QuadiagError):
    """The problem file is malformed; the message names the offending field."""


# ------------------------------------------------------------- parsing


def _entry(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number or [re, im], got a boolean")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected a number or [re, im], got {json.dumps(value)}")


def parse_matrix(value, name: str, n: Optional[int] = None) -> np.ndarray:
    """Square complex matrix from nested lists of numbers or [re, im] pairs."""
    if not isinstance(value, list) or not value:
        raise ParseError(f"{name}: expected a non-empty list of rows")
    size = len(value)
    if n is not None and size != n:
        raise ParseError(f"{name}: has {size} rows, expected n = {n}")
    out = np.zeros((size, size), dtype=complex)
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ParseError(f"{name}[{i}]: expected a row list")
        if len(row) != size:
            raise ParseError(f"{name}[{i}]: has {len(row)} entries, expected {size}")
        for j, x in enumerate(row):
            out[i, j] = _entry(x, f"{name}[{i}][{j}]")
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{name}: entries must be finite")
    return out


def _vector(value, name: str, n: int) -> List[float]:
    if not isinstance(value, list) or len(value) != n:
        raise ParseError(f"{name}: expected a list of {n} entries")
    for i, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ParseError(f"{name}[{i}]: expected a number")
    return [float(x) for x in value]


def _require(doc: dict, key: str):
    if key not in doc:
        raise ParseError(f"{key}: missing")
    return doc[key]


def parse_problem(doc: Any):
    """Turn a problem document into (form, options).

    ``options`` holds ``allow_partial`` and a ``tolerances`` map; model
    defaults are merged below the file's own options.
    """
    if not isinstance(doc, dict):
        raise ParseError("problem: expected a JSON object")
    kind = _require(doc, "kind")
    if kind not in KINDS:
        raise ParseError(f"kind: expected one of {', '.join(KINDS)}, got {json.dumps(kind)}")
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("options: expected an object")
    options = dict(options)
    if "allow_partial" in options and not isinstance(options["allow_partial"], bool):
        raise ParseError("options.allow_partial: expected true or false")
    tols = options.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ParseError("options.tolerances: expected an object")
    for key, value in tols.items():
        if key not in TOLERANCE_KEYS:
            raise ParseError(f"options.tolerances.{key}: unknown tolerance")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise ParseError(f"options.tolerances.{key}: expected a positive number")

    if kind == "model":
        name = _require(doc, "name")
        if not isinstance(name, str):
            raise ParseError("name: expected a string")
        params = doc.get("parameters", {})
        if not isinstance(params, dict):
            raise ParseError("parameters: expected an object")
        form = generate(name, params)
        return form, {**model_options(name), **options}

    n = doc.get("n")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 1):
        raise ParseError("n: expected a positive integer")
    try:
        if kind in ("boson", "fermion"):
            alpha = parse_matrix(_require(doc, "alpha"), "alpha", n)
            n = alpha.shape[0]
            gamma = parse_matrix(doc["gamma"], "gamma", n) if "gamma" in doc else np.zeros((n, n))
            if kind == "fermion":
                return FermionForm(alpha, gamma), options
            sig = _vector(doc["signature"], "signature", n) if "signature" in doc else None
            return BosonForm(alpha, gamma, sig), options
        if kind in ("pairing-bose", "pairing-fermi"):
            alpha = parse_matrix(_require(doc, "alpha"), "alpha", n)
            n = alpha.shape[0]
            epsilon = parse_matrix(_require(doc, "epsilon"), "epsilon", n)
            gamma = parse_matrix(_require(doc, "gamma"), "gamma", n)
            stats = "boson" if kind == "pairing-bose" else "fermion"
            return PairingForm(alpha, epsilon, gamma, stats), options
        mu = parse_matrix(_require(doc, "mu"), "mu", n)
        n = mu.shape[0]
        kappa = parse_matrix(_require(doc, "kappa"), "kappa", n)
        gamma_pq = parse_matrix(doc["gamma_pq"], "gamma_pq", n) if "gamma_pq" in doc else None
        sig = _vector(doc["signature"], "signature", n) if "signature" in doc else None
        return CoordForm(mu, kappa, gamma_pq, sig), options
    except ParseError:
        raise
    except QuadiagError as exc:
        # structural problems in otherwise well-formed matrices
        raise ParseError(str(exc)) from exc


def load_problem(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return parse_problem(doc)


# ------------------------------------------------------------- reports


def _num(x):
    """JSON-safe scalar: complex as [re, im], NaN as null."""
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(float(x.real)), _num(float(x.imag))]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    return x


def _witness(w: Optional[dict]):
    return None if w is None else {k: _num(v) for k, v in w.items()}


def encode_matrix(a: np.ndarray) -> list:
    """Matrix as nested lists of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a, dtype=complex)]


def decode_matrix(rows: list) -> np.ndarray:
    """Inverse of ``encode_matrix``."""
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _tolerances(options: dict, args) -> Tolerances:
    values = dict(options.get("tolerances", {}))
    for key in TOLERANCE_KEYS:
        flag = getattr(args, f"tol_{key}", None)
        if flag is not None:
            values[key] = flag
    return Tolerances.from_env(**values)


def build_report(form: QuadraticForm, options: dict, args) -> Tuple[dict, int]:
    tol = _tolerances(options, args)
    allow_partial = bool(options.get("allow_partial", False))
    if getattr(args, "allow_partial", None) is not None:
        allow_partial = args.allow_partial
    report: Dict[str, Any] = {"kind": form_kind(form)}
    try:
        result = diagonalize(form, allow_partial=allow_partial, tol=tol)
    except NotDiagonalizable as exc:
        cls = exc.classification
        report.update(verdict="not-diagonalizable", classification=cls.verdict,
                      message=cls.describe(), witness=_witness(cls.witness))
        return report, EXIT_NOT_DIAGONALIZABLE
    residual = getattr(result, "residual_modes", None)
    partial = bool(getattr(result, "partial", False))
    checks = verify(result, form).as_dict()
    worst = max((v for v in checks.values() if v is not None), default=0.0)
    cls = result.classification
    report.update(
        verdict="partial" if partial else "diagonalized",
        classification=cls.verdict if cls is not None else PHYSICAL,
        modes=[{"omega": _num(m.omega), "statistics": m.statistics, "tag": m.tag} for m in result.modes],
        omegas=[_num(w) for w in result.omegas],
        constant=_num(result.constant),
        residual_modes=[[_num(float(x)) for x in row] for row in residual] if residual is not None else [],
        residuals={k: _num(v) for k, v in checks.items()},
        verified=bool(worst <= tol.get("orth")),
        witness=_witness(cls.witness) if cls is not None else None,
    )
    if getattr(args, "emit_transform", False):
        t = getattr(result, "t_d", result.t)
        report["transform"] = encode_matrix(t)
    return report, EXIT_OK


def render_text(report: dict) -> str:
    lines = [f"verdict: {report['verdict']}"]
    if "kind" in report:
        lines.append(f"kind: {report['kind']}")
    if report.get("message"):
        lines.append(f"reason: {report['message']}")
    if report.get("error"):
        lines.append(f"error: {report['error']}")
    for k, mode in enumerate(report.get("modes", [])):
        lines.append(f"mode {k}: omega = {mode['omega']:.12g} ({mode['tag']})")
    if "constant" in report:
        lines.append(f"constant: {report['constant']:.12g}")
    for row in report.get("residual_modes", []):
        lines.append("residual mode: " + " ".join(f"{x:.6g}" for x in row))
    if "residuals" in report:
        parts = [f"{k}={v:.2e}" for k, v in report["residuals"].items() if v is not None]
        lines.append("residuals: " + ", ".join(parts))
    return "\n".join(lines) + "\n"


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _serialize(report: dict, fmt: str) -> str:
    if fmt == "text":
        return render_text(report)
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


# ------------------------------------------------------------ commands


def cmd_diagonalize(args) -> int:
    try:
        form, options = load_problem(args.input)
        report, code = build_report(form, options, args)
    except QuadiagError as exc:
        report, code = {"verdict": "error", "error": f"{type(exc).__name__}: {exc}"}, EXIT_ERROR
        print(f"error: {exc}", file=sys.stderr)
    _emit(_serialize(report, args.format), args.output)
    return code


def cmd_check(args) -> int:
    try:
        form, options = load_problem(args.input)
        cls = classify(dynamic_matrix(form), _tolerances(options, args))
    except QuadiagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    word = CHECK_WORDS[cls.verdict]
    if args.format == "json":
        _emit(json.dumps({"verdict": word, "message": cls.describe(), "witness": _witness(cls.witness)},
                         indent=2, allow_nan=False) + "\n", args.output)
    else:
        _emit(f"{word}\n" if cls.ok else f"{word}: {cls.describe()}\n", args.output)
    return EXIT_OK if cls.ok else EXIT_NOT_DIAGONALIZABLE


def load_fixtures(path: str) -> List[ModelSpec]:
    """Fixtures from a JSON list of {name, parameters, expected, options}."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot load fixtures from {path}: {exc}") from exc
    if not isinstance(doc, list):
        raise ParseError("fixtures: expected a list")
    specs = []
    for i, item in enumerate(doc):
        if not isinstance(item, dict) or "name" not in item:
            raise ParseError(f"fixtures[{i}]: expected an object with a name")
        specs.append(ModelSpec(item["name"], item.get("parameters", {}), item.get("expected"),
                               item.get("options", {})))
    return specs


def cmd_corpus(args) -> int:
    try:
        pool = load_fixtures(args.fixtures) if args.fixtures else None
    except QuadiagError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    specs = select_fixtures(args.filter, pool)
    if not specs:
        print(f"no fixture matches {args.filter!r}", file=sys.stderr)
        return EXIT_ERROR
    results = [run_fixture(s) for s in specs]
    width = max(len(r.spec.label) for r in results)
    print(f"{'fixture':<{width}}  {'status':<6}  {'expected':<28}  {'got':<28}  residual")
    for r in results:
        exp = r.spec.expected or {}
        want = _short(exp.get("omegas"), exp.get("constant"))
        got = _short(r.omegas, r.constant)
        res = f"{r.worst_residual:.1e}" if r.worst_residual is not None else "-"
        print(f"{r.spec.label:<{width}}  {'ok' if r.passed else 'FAIL':<6}  {want:<28}  {got:<28}  {res}")
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"diff {r.spec.label}: {r.diff}")
    print(f"{len(results) - len(failed)}/{len(results)} fixtures passed")
    return EXIT_OK if not failed else EXIT_ERROR


def _short(omegas, constant) -> str:
    if omegas is None and constant is None:
        return "-"
    ws = ",".join(f"{w:.4g}" for w in (omegas or []))
    c = "-" if constant is None else f"{constant:.4g}"
    return f"[{ws}] c={c}"


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadiag", description="Diagonalize quadratic Hamiltonians.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="problem file (JSON)")
        p.add_argument("--tol-real", type=float, default=None, help="relative tolerance on imaginary parts")
        p.add_argument("--tol-rank", type=float, default=None, help="relative rank tolerance")
        p.add_argument("--tol-orth", type=float, default=None, help="threshold on verification residuals")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("diagonalize", help="diagonalize a problem file and write a report")
    common(p)
    p.add_argument("--emit-transform", action="store_true", help="include the transformation matrix")
    p.add_argument("--allow-partial", action=argparse.BooleanOptionalAction, default=None,
                   help="leave zero-frequency modes of coordinate forms as residual")
    p.set_defaults(func=cmd_diagonalize)

    p = sub.add_parser("check", help="classify a problem file without diagonalizing")
    common(p)
    p.set_defaults(func=cmd_check, format="text")

    p = sub.add_parser("corpus", help="run the regression fixtures")
    p.add_argument("filter", nargs="?", default=None, help="substring of model names")
    p.add_argument("--fixtures", default=None, help="JSON fixture list replacing the built-in one")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
