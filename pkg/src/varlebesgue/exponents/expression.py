"""Closed-form expressions for exponent fields.

Grammar (a safe subset of Python expression syntax)::

    expr    := number | name | expr op expr | -expr | call | cond | "(" expr ")"
    op      := + - * / ** and comparisons < <= > >=
    name    := x | y | x1 | x2 | r | e | pi | inf
    call    := log | exp | sqrt | abs | sin | cos | floor | sign "(" expr ")"
             | min | max "(" expr, expr, ... ")"
    cond    := expr "if" comparison "else" expr

``x``/``x1`` and ``y``/``x2`` are the coordinates and ``r`` is the Euclidean
norm ``|x|``. Conditionals express piecewise definitions on half-spaces, e.g.
``2 if x < 1 else 4``. Errors carry the 1-based column of the offending token.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse_expression"]


class ExpressionError(ValueError):
    def __init__(self, message: str, source: str, column: int | None = None):
        self.source = source
        self.column = column
        where = f" at column {column}" if column is not None else ""
        super().__init__(f"{message}{where}: {source!r}")


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}

_CMPOPS = {
    ast.Lt: operator.lt,
    ast.LtE: operator.le,
    ast.Gt: operator.gt,
    ast.GtE: operator.ge,
}

_UNARY_FUNCS = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "floor": np.floor,
    "sign": np.sign,
}

_NARY_FUNCS = {"min": np.minimum, "max": np.maximum}

_CONSTANTS = {"e": np.e, "pi": np.pi, "inf": np.inf}

_COORDS = {"x": 0, "x1": 0, "y": 1, "x2": 1}


class Expression:
    """A parsed exponent expression, callable on an ``(N, dim)`` point array."""

    def __init__(self, source: str, dim: int = 1):
        self.source = source.strip()
        self.dim = dim
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"syntax error ({exc.msg})", self.source, exc.offset) from None
        self._body = tree.body
        self._check(self._body)

    def __repr__(self):
        return f"Expression({self.source!r}, dim={self.dim})"

    def _fail(self, node, message):
        col = getattr(node, "col_offset", None)
        raise ExpressionError(message, self.source, None if col is None else col + 1)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                self._fail(node, "only numeric literals are allowed")
        elif isinstance(node, ast.Name):
            if node.id in _COORDS:
                if _COORDS[node.id] >= self.dim:
                    self._fail(node, f"coordinate {node.id!r} does not exist in dimension {self.dim}")
            elif node.id not in _CONSTANTS and node.id != "r":
                self._fail(node, f"unknown name {node.id!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                self._fail(node, "unsupported operator")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                self._fail(node, "unsupported unary operator")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                self._fail(node, "unsupported call")
            name = node.func.id
            if name in _UNARY_FUNCS:
                if len(node.args) != 1:
                    self._fail(node, f"{name} takes exactly one argument")
            elif name in _NARY_FUNCS:
                if len(node.args) < 2:
                    self._fail(node, f"{name} takes at least two arguments")
            else:
                self._fail(node, f"unknown function {name!r}")
            for a in node.args:
                self._check(a)
        elif isinstance(node, ast.IfExp):
            self._check_condition(node.test)
            self._check(node.body)
            self._check(node.orelse)
        else:
            self._fail(node, f"unsupported syntax {type(node).__name__}")

    def _check_condition(self, node):
        if isinstance(node, ast.Compare):
            for op in node.ops:
                if type(op) not in _CMPOPS:
                    self._fail(node, "unsupported comparison")
            self._check(node.left)
            for c in node.comparators:
                self._check(c)
        elif isinstance(node, ast.BoolOp):
            for v in node.values:
                self._check_condition(v)
        else:
            self._fail(node, "condition must be a comparison")

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if self.dim == 1 else pts.reshape(1, -1)
        env = {"pts": pts, "r": None}
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = self._eval(self._body, env)
        return np.broadcast_to(np.asarray(out, dtype=float), (len(pts),)).copy()

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id in _CONSTANTS:
                return _CONSTANTS[node.id]
            if node.id == "r":
                if env["r"] is None:
                    env["r"] = np.sqrt(np.sum(env["pts"] ** 2, axis=1))
                return env["r"]
            return env["pts"][:, _COORDS[node.id]]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Call):
            args = [self._eval(a, env) for a in node.args]
            name = node.func.id
            if name in _UNARY_FUNCS:
                return _UNARY_FUNCS[name](args[0])
            out = args[0]
            for a in args[1:]:
                out = _NARY_FUNCS[name](out, a)
            return out
        if isinstance(node, ast.IfExp):
            return np.where(
                self._eval_condition(node.test, env),
                self._eval(node.body, env),
                self._eval(node.orelse, env),
            )
        raise AssertionError("unchecked node")  # pragma: no cover

    def _eval_condition(self, node, env):
        if isinstance(node, ast.BoolOp):
            parts = [self._eval_condition(v, env) for v in node.values]
            combine = np.logical_and if isinstance(node.op, ast.And) else np.logical_or
            out = parts[0]
            for p in parts[1:]:
                out = combine(out, p)
            return out
        left = self._eval(node.left, env)
        result = True
        for op, comp in zip(node.ops, node.comparators):
            right = self._eval(comp, env)
            result = np.logical_and(result, _CMPOPS[type(op)](left, right))
            left = right
        return result


def parse_expression(source: str, dim: int = 1) -> Expression:
    return Expression(source, dim)
