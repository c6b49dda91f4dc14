"""Tiny arithmetic expression language for user-supplied scalar functions.

Grammar: ``+ - * / **`` (also ``pow(a, b)``), unary minus, parentheses,
the functions sqrt, exp, log, sin, cos, tan, abs, numeric literals and
the constants ``pi`` and ``e``.  Variable names are declared by the
caller (e.g. ``x1 x2 z1 q1_1``).  Compiled expressions evaluate through
the :mod:`cartanarea.dual` helpers, so they stay differentiable.
"""

import ast
import math

from . import dual

_FUNCTIONS = {
    "sqrt": dual.sqrt,
    "exp": dual.exp,
    "log": dual.log,
    "sin": dual.sin,
    "cos": dual.cos,
    "tan": dual.tan,
    "abs": dual.fabs,
    "pow": dual.power,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


class ExpressionError(ValueError):
    """Expression failed to parse or used an unsupported construct."""


def compile_expression(text, variables):
    """Compile ``text`` into ``f(values) -> scalar``.

    ``variables`` is an ordered sequence of names; the compiled function
    takes one positional sequence of the same length.
    """
    index = {name: i for i, name in enumerate(variables)}
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse expression {text!r}: {exc}") from exc

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, (int, float)):
                c = float(node.value)
                return lambda env: c
            raise ExpressionError(f"unsupported literal {node.value!r}")
        if isinstance(node, ast.Name):
            if node.id in index:
                i = index[node.id]
                return lambda env: env[i]
            if node.id in _CONSTANTS:
                c = _CONSTANTS[node.id]
                return lambda env: c
            raise ExpressionError(f"unknown variable {node.id!r}")
        if isinstance(node, ast.BinOp):
            op = _BINOPS.get(type(node.op))
            if op is None:
                raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
            left, right = build(node.left), build(node.right)
            return lambda env: op(left(env), right(env))
        if isinstance(node, ast.UnaryOp):
            operand = build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda env: -operand(env)
            if isinstance(node.op, ast.UAdd):
                return operand
            raise ExpressionError(f"unsupported operator {type(node.op).__name__}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.keywords:
                raise ExpressionError("only plain function calls are allowed")
            fn = _FUNCTIONS.get(node.func.id)
            if fn is None:
                raise ExpressionError(f"unknown function {node.func.id!r}")
            args = [build(a) for a in node.args]
            return lambda env: fn(*(a(env) for a in args))
        raise ExpressionError(f"unsupported syntax {type(node).__name__}")

    return build(tree)
