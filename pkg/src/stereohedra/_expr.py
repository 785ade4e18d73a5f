"""Tiny arithmetic-expression evaluator for catalog and preset files.

Coordinates like ``cos(pi/12)`` are kept symbolic in data files and
evaluated here at load time, so irrational inputs are never stored as
truncated decimals.  Only a fixed whitelist of names and operators is
accepted.
"""

from __future__ import annotations

import ast
import math

_FUNCTIONS = {
    "cos": math.cos,
    "sin": math.sin,
    "tan": math.tan,
    "sqrt": math.sqrt,
}

_CONSTANTS = {"pi": math.pi}


class ExpressionError(ValueError):
    """Raised when a data-file expression uses anything off the whitelist."""


def evaluate(expr: str, names: dict[str, float] | None = None) -> float:
    """Evaluate an arithmetic expression over numbers, pi and named parameters."""
    env = dict(_CONSTANTS)
    if names:
        env.update(names)
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"bad expression {expr!r}: {exc}") from None
    return _eval_node(tree.body, env, expr)


def _eval_node(node: ast.AST, env: dict[str, float], expr: str) -> float:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)):
            return float(node.value)
        raise ExpressionError(f"non-numeric constant in {expr!r}")
    if isinstance(node, ast.Name):
        if node.id in env:
            return float(env[node.id])
        raise ExpressionError(f"unknown name {node.id!r} in {expr!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        value = _eval_node(node.operand, env, expr)
        return value if isinstance(node.op, ast.UAdd) else -value
    if isinstance(node, ast.BinOp) and isinstance(
        node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)
    ):
        left = _eval_node(node.left, env, expr)
        right = _eval_node(node.right, env, expr)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        return left / right
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        func = _FUNCTIONS.get(node.func.id)
        if func is None or node.keywords or len(node.args) != 1:
            raise ExpressionError(f"unsupported call in {expr!r}")
        return func(_eval_node(node.args[0], env, expr))
    raise ExpressionError(f"unsupported syntax in {expr!r}")
