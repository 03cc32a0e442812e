"""Problem files: one JSON document describing K, X and run options.

    {
      "dimension": 2,
      "X": {"shape": "ball", "radius": 1.0},
      "K": {"inequalities": ["0.25 - x1^2 - x2^2"]},
      "options": {"dmin": 2, "dmax": 10, "seed": 0}
    }

``X.shape`` is ``"box"`` (with ``half_widths``, a list or a single number) or
``"ball"`` (with ``radius``, default 1).  Each inequality ``g(x) >= 0`` is given
either as an expression in ``x1..xn`` using ``+ - * ^ **`` and parentheses, or
as a term list ``{"basis": ..., "terms": [{"coefficient": c, "exponents": [...]}]}``.
Unknown keys are rejected at every level.  ``vol_ref`` in ``options`` declares
an exactly known volume of K.
"""
from __future__ import annotations

import ast
import json
from dataclasses import dataclass, field
from pathlib import Path

from .poly import BASES, Polynomial
from .semialg import INNER_K, Ball, Box, OuterDomain, SemialgebraicSet

OPTION_KEYS = {
    "dmin": int,
    "dmax": int,
    "step": int,
    "basis": str,
    "tol": float,
    "cert_tol": float,
    "seed": int,
    "samples": int,
    "degrees": list,
    "grid": int,
    "t_values": list,
    "inner_samples": int,
    "vol_ref": float,
    "workers": int,
}


class ProblemFileError(ValueError):
    """Malformed problem file; ``line``/``column`` are set for syntax errors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str = ""):
        where = f"{source}:" if source else ""
        if line is not None:
            where += f"{line}:{column}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass
class ProblemFile:
    dimension: int
    X: OuterDomain
    K: SemialgebraicSet
    options: dict = field(default_factory=dict)
    source: str = ""

    def option(self, key: str, default=None):
        return self.options.get(key, default)


def parse_polynomial(text: str, n: int) -> Polynomial:
    """Parse an expression in ``x1..xn``; ``^`` means power."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse polynomial {text!r}: {exc.msg}") from None

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
            return Polynomial.constant(n, float(node.value))
        if isinstance(node, ast.Name):
            name = node.id
            if name.startswith("x") and name[1:].isdigit() and 1 <= int(name[1:]) <= n:
                return Polynomial.variable(n, int(name[1:]) - 1)
            if n == 1 and name == "x":
                return Polynomial.variable(1, 0)
            raise ValueError(f"unknown variable {name!r} (expected x1..x{n})")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = walk(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                e = node.right
                if not (isinstance(e, ast.Constant) and isinstance(e.value, int) and e.value >= 0):
                    raise ValueError("exponents must be non-negative integer literals")
                return walk(node.left) ** e.value
            ops = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}
            for kind, fn in ops.items():
                if isinstance(node.op, kind):
                    return fn(walk(node.left), walk(node.right))
            if isinstance(node.op, ast.Div) and isinstance(node.right, ast.Constant):
                return walk(node.left) * (1.0 / float(node.right.value))
        raise ValueError(f"unsupported syntax in polynomial {text!r}")

    return walk(tree)


def _reject_unknown(obj: dict, allowed, where: str, source: str):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ProblemFileError(f"unknown key(s) in {where}: {', '.join(extra)}", source=source)


def _outer(desc, n: int, source: str) -> OuterDomain:
    if not isinstance(desc, dict) or "shape" not in desc:
        raise ProblemFileError("X must be an object with a 'shape'", source=source)
    shape = desc["shape"]
    if shape == "box":
        _reject_unknown(desc, {"shape", "half_widths"}, "X", source)
        a = desc.get("half_widths", [1.0 / n**0.5] * n if n > 1 else [1.0])
        if isinstance(a, (int, float)):
            a = [float(a)] * n
        if len(a) != n:
            raise ProblemFileError(f"X.half_widths has {len(a)} entries, expected {n}", source=source)
        return Box(a)
    if shape == "ball":
        _reject_unknown(desc, {"shape", "radius"}, "X", source)
        return Ball(n, float(desc.get("radius", 1.0)))
    raise ProblemFileError(f"X.shape must be 'box' or 'ball', got {shape!r}", source=source)


def _inequality(item, n: int, i: int, source: str) -> Polynomial:
    try:
        if isinstance(item, str):
            return parse_polynomial(item, n)
        if isinstance(item, dict):
            _reject_unknown(item, {"basis", "terms"}, f"K.inequalities[{i}]", source)
            return Polynomial.from_dict(n, item)
    except (ValueError, KeyError, TypeError) as exc:
        raise ProblemFileError(f"K.inequalities[{i}]: {exc}", source=source) from None
    raise ProblemFileError(f"K.inequalities[{i}] must be a string or a term object", source=source)


def _options(opts, source: str) -> dict:
    if not isinstance(opts, dict):
        raise ProblemFileError("options must be an object", source=source)
    _reject_unknown(opts, OPTION_KEYS, "options", source)
    out = {}
    for key, value in opts.items():
        kind = OPTION_KEYS[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, kind) or isinstance(value, bool):
            raise ProblemFileError(f"options.{key} must be of type {kind.__name__}", source=source)
        if key == "degrees" and not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise ProblemFileError("options.degrees must be a list of integers", source=source)
        if key == "t_values" and not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ProblemFileError("options.t_values must be a list of numbers", source=source)
        out[key] = [float(v) for v in value] if key == "t_values" else value
    if "basis" in out and out["basis"] not in BASES:
        raise ProblemFileError(f"options.basis must be one of {BASES}", source=source)
    return out


def loads(text: str, source: str = "") -> ProblemFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, exc.lineno, exc.colno, source) from None
    if not isinstance(data, dict):
        raise ProblemFileError("top level must be an object", source=source)
    _reject_unknown(data, {"dimension", "X", "K", "options"}, "top level", source)
    for key in ("dimension", "X", "K"):
        if key not in data:
            raise ProblemFileError(f"missing required key {key!r}", source=source)
    n = data["dimension"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemFileError("dimension must be a positive integer", source=source)
    try:
        X = _outer(data["X"], n, source)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ProblemFileError):
            raise
        raise ProblemFileError(f"X: {exc}", source=source) from None
    kdesc = data["K"]
    if not isinstance(kdesc, dict) or not isinstance(kdesc.get("inequalities"), list):
        raise ProblemFileError("K must be an object with an 'inequalities' list", source=source)
    _reject_unknown(kdesc, {"inequalities"}, "K", source)
    ineqs = [_inequality(item, n, i, source) for i, item in enumerate(kdesc["inequalities"])]
    K = SemialgebraicSet(n, ineqs, INNER_K)
    return ProblemFile(n, X, K, _options(data.get("options", {}), source), source)


def load(path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def dumps(problem: ProblemFile) -> str:
    X = problem.X
    if X.shape == "box":
        xs = {"shape": "box", "half_widths": list(X.half_widths)}
    else:
        xs = {"shape": "ball", "radius": X.radius}
    doc = {
        "dimension": problem.dimension,
        "X": xs,
        "K": {"inequalities": [g.to_dict() for g in problem.K.inequalities]},
        "options": problem.options,
    }
    return json.dumps(doc, indent=2) + "\n"
