"""Safe evaluation of small numeric expressions such as ``pi/2`` or ``ln4``."""

from __future__ import annotations

import ast
import math
import operator
import re

from translab.errors import InputError

_NAMES = {"pi": math.pi, "e": math.e, "inf": math.inf}
_FUNCS = {"ln": math.log, "log": math.log, "sqrt": math.sqrt, "exp": math.exp}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos}

# "ln2" -> "ln(2)", "ln2.5" -> "ln(2.5)"
_LN_SHORTHAND = re.compile(r"\bln(\d+(?:\.\d+)?)")


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        return _UNOPS[type(node.op)](_eval(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise InputError(f"unsupported expression element: {ast.dump(node)}")


def number(text) -> float:
    """Evaluate ``text`` as a real number; accepts pi, e, ln/log/sqrt/exp."""
    if isinstance(text, (int, float)):
        return float(text)
    src = _LN_SHORTHAND.sub(r"ln(\1)", str(text).strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse number {text!r}") from exc
    try:
        return _eval(tree)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise InputError(f"cannot evaluate {text!r}: {exc}") from exc


def numbers(text: str, count: int | None = None) -> list[float]:
    """Comma-separated list of numbers."""
    vals = [number(t) for t in str(text).split(",") if t.strip()]
    if count is not None and len(vals) != count:
        raise InputError(f"expected {count} comma-separated values, got {len(vals)} in {text!r}")
    return vals
