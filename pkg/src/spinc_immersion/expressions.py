"""Tiny expression grammar for one-form coefficients and phase functions.

Grammar (Python syntax, parsed with :mod:`ast` and never evaluated)::

    expr   := expr ('+' | '-' | '*' | '/') expr
            | expr ('**' | '^') INTEGER
            | ('+' | '-') expr
            | FUNC '(' expr ')'
            | NUMBER | 'u' | 'v' | 'pi'
    FUNC   := sin | cos

Expressions are turned into sympy objects so they can be differentiated
exactly and vectorised with ``lambdify``.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

U, V = sp.symbols("u v", real=True)
_NAMES = {"u": U, "v": V, "pi": sp.pi}
_FUNCS = {"sin": sp.sin, "cos": sp.cos}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
}


class ExpressionError(ValueError):
    pass


def _build(node: ast.AST) -> sp.Expr:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
    if isinstance(node, ast.Name):
        if node.id not in _NAMES:
            raise ExpressionError(f"unknown name {node.id!r} (allowed: u, v, pi)")
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _build(node.operand)
        return -inner if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            exp = node.right
            sign = 1
            if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                sign, exp = -1, exp.operand
            if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int) and not isinstance(exp.value, bool)):
                raise ExpressionError("exponents must be integer literals")
            return _build(node.left) ** (sign * exp.value)
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExpressionError(f"operator {type(node.op).__name__} not allowed")
        return op(_build(node.left), _build(node.right))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError("only sin(...) and cos(...) calls are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        return _FUNCS[node.func.id](_build(node.args[0]))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def parse_expression(text: str | float | int) -> sp.Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = repr(text)
    if not isinstance(text, str):
        raise ExpressionError(f"expected an expression string, got {type(text).__name__}")
    try:
        # '^' is a synonym for '**'; rewrite it so it gets power precedence, not xor
        tree = ast.parse(text.strip().replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return _build(tree)


@dataclass(frozen=True)
class ScalarField:
    """A parsed function of (u, v) with exact partial derivatives."""

    source: str
    expr: sp.Expr = field(compare=False)

    @classmethod
    def parse(cls, text: str | float | int) -> ScalarField:
        return cls(str(text), parse_expression(text))

    @classmethod
    def zero(cls) -> ScalarField:
        return cls("0", sp.Integer(0))

    def _fn(self, expr: sp.Expr) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        f = sp.lambdify((U, V), expr, "numpy")
        return lambda u, v: np.broadcast_to(np.asarray(f(u, v), dtype=float), np.broadcast_shapes(np.shape(u), np.shape(v))).copy()

    def __call__(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self._fn(self.expr)(u, v)

    def derivative(self, axis: int) -> ScalarField:
        sym = (U, V)[axis]
        d = sp.diff(self.expr, sym)
        return ScalarField(f"d/d{sym}({self.source})", d)

    @property
    def is_zero(self) -> bool:
        return self.expr == 0
