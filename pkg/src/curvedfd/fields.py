"""Scalar fields on the plane with access to their partial derivatives.

Two supply paths exist.  ``SymbolicField`` wraps a sympy expression in ``x, y``
and differentiates it exactly.  ``SampledField`` wraps a plain point evaluator
and synthesizes partials with sixth-order central differences.
"""

from __future__ import annotations

import re
from functools import lru_cache

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

X, Y, T = sp.symbols("x y t", real=True)

_ALLOWED_FUNCS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp}
_TRANSFORMS = standard_transformations + (convert_xor,)
_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_]\w*")
_ALLOWED_CHARS = re.compile(r"[\w\s+\-*/^().]*")


def parse_expression(text: str, variables=("x", "y")) -> sp.Expr:
    """Parse an arithmetic expression string.

    Supports ``+ - * / ^`` (``**`` also accepted), ``sin``, ``cos``, ``exp``,
    the constant ``pi`` and the named variables.  Anything else is rejected.
    """
    symbols = {"x": X, "y": Y, "t": T}
    # the sympy parser evaluates Python, so screen the text lexically first
    stripped = _NUMBER.sub(" ", text)
    names = set(_NAME.findall(stripped)) - set(_ALLOWED_FUNCS) - {"pi"} - set(variables)
    if not text.strip() or not _ALLOWED_CHARS.fullmatch(text) or names:
        raise ValueError(f"invalid expression {text!r}"
                         + (f": unknown names {sorted(names)}" if names else ""))
    local = dict(_ALLOWED_FUNCS)
    local["pi"] = sp.pi
    for name in variables:
        local[name] = symbols[name]
    try:
        expr = parse_expr(text, local_dict=local, global_dict={"Integer": sp.Integer,
                                                              "Float": sp.Float,
                                                              "Rational": sp.Rational,
                                                              "Symbol": sp.Symbol},
                          transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of exception types
        raise ValueError(f"cannot parse expression {text!r}: {exc}") from exc
    if not isinstance(expr, sp.Expr):
        raise ValueError(f"{text!r} is not a scalar expression")
    allowed = {symbols[v] for v in variables}
    extra = expr.free_symbols - allowed
    if extra:
        raise ValueError(f"unknown symbols {sorted(map(str, extra))} in {text!r}")
    for fn in expr.atoms(sp.Function):
        if fn.func not in _ALLOWED_FUNCS.values():
            raise ValueError(f"function {fn.func} not allowed in {text!r}")
    return expr


def _broadcast(value, x, y):
    shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
    out = np.asarray(value, dtype=float)
    if out.shape != shape:
        out = np.broadcast_to(out, shape).copy()
    return out if shape else float(out)


class ScalarField:
    """Interface: ``partial(m, n, x, y)`` returns d^(m+n) F / dx^m dy^n."""

    def partial(self, m: int, n: int, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.partial(0, 0, x, y)


class SymbolicField(ScalarField):
    """Field given by a sympy expression in ``x`` and ``y``."""

    def __init__(self, expr):
        if isinstance(expr, str):
            expr = parse_expression(expr)
        self.expr = sp.sympify(expr)
        self._derivs = {}
        self._compiled = {}

    def __repr__(self):
        return f"SymbolicField({self.expr})"

    def derivative_expr(self, m: int, n: int) -> sp.Expr:
        key = (m, n)
        if key not in self._derivs:
            e = self.expr
            if m:
                e = sp.diff(e, X, m)
            if n:
                e = sp.diff(e, Y, n)
            self._derivs[key] = e
        return self._derivs[key]

    def _compile(self, m, n, module):
        key = (m, n, module)
        if key not in self._compiled:
            self._compiled[key] = sp.lambdify((X, Y), self.derivative_expr(m, n), module)
        return self._compiled[key]

    def partial(self, m, n, x, y):
        return _broadcast(self._compile(m, n, "numpy")(x, y), x, y)

    def partial_mp(self, m, n, x, y):
        """Scalar evaluation in mpmath at the current ``mpmath.mp.dps``."""
        return self._compile(m, n, "mpmath")(x, y)

    # arithmetic helpers used when building catalog problems
    def __add__(self, other):
        return SymbolicField(self.expr + _expr_of(other))

    def __mul__(self, other):
        return SymbolicField(self.expr * _expr_of(other))


def _expr_of(obj):
    return obj.expr if isinstance(obj, SymbolicField) else sp.sympify(obj)


def constant(value: float) -> SymbolicField:
    return SymbolicField(sp.Float(value) if not float(value).is_integer() else sp.Integer(int(value)))


# Sixth-order central difference weights, keyed by derivative order.
_FD_WEIGHTS = {
    0: (np.array([1.0]), 0),
    1: (np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60]), 3),
    2: (np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90]), 3),
    3: (np.array([-7 / 240, 3 / 10, -169 / 120, 61 / 30, 0.0,
                  -61 / 30, 169 / 120, -3 / 10, 7 / 240]), 4),
}


class SampledField(ScalarField):
    """Field known only through a vectorized point evaluator ``func(x, y)``.

    Partials up to order 3 in each variable come from tensor products of
    sixth-order central stencils with spacing ``1e-3 * scale``.
    """

    def __init__(self, func, scale: float = 1.0):
        self.func = func
        self.delta = 1e-3 * scale

    def partial(self, m, n, x, y):
        if m > 3 or n > 3:
            raise ValueError("SampledField supports at most third partials per variable")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        wx, cx = _FD_WEIGHTS[m]
        wy, cy = _FD_WEIGHTS[n]
        total = np.zeros(np.broadcast(x, y).shape)
        for ix, a in enumerate(wx):
            if a == 0.0:
                continue
            for iy, b in enumerate(wy):
                if b == 0.0:
                    continue
                total = total + a * b * self.func(x + (ix - cx) * self.delta,
                                                  y + (iy - cy) * self.delta)
        total = total / self.delta ** (m + n)
        return total if total.shape else float(total)


@lru_cache(maxsize=None)
def zero_field() -> SymbolicField:
    return SymbolicField(sp.Integer(0))
