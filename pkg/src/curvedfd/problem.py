"""PDE data and the reduction to ``Δu + a u_x + b u_y + d u = f``.

The model problem is ``-div(alpha grad u) + beta . grad u + kappa u = phi`` in
the domain with ``u = g`` on its boundary.  Dividing by ``-alpha`` gives

    a = (alpha_x - beta1) / alpha,   b = (alpha_y - beta2) / alpha,
    d = -kappa / alpha,              f = -phi / alpha.

Partials of ``a, b, d, f`` are obtained by exact Leibniz-rule expansion of
these quotients, never by differencing the quotients themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .exceptions import NonPositiveDiffusion
from .fields import X, Y, ScalarField, SymbolicField, constant
from .geometry import Domain

MULTI_INDICES = {
    0: [(0, 0)],
    1: [(0, 0), (1, 0), (0, 1)],
    2: [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)],
}


@dataclass
class CoefficientFields:
    alpha: ScalarField
    beta1: ScalarField
    beta2: ScalarField
    kappa: ScalarField
    phi: ScalarField

    @classmethod
    def from_expressions(cls, alpha, beta1, beta2, kappa, phi="0"):
        return cls(*(f if isinstance(f, ScalarField) else SymbolicField(f)
                     for f in (alpha, beta1, beta2, kappa, phi)))

    def check_positive(self, pts, n_min: int = 10_000):
        pts = np.atleast_2d(pts)
        vals = self.alpha(pts[:, 0], pts[:, 1])
        if np.any(vals <= 0):
            raise NonPositiveDiffusion("diffusion coefficient alpha must be positive")
        return True


def _quotient_partials(num, den, order):
    """Partials of num/den up to ``order`` from those of num and den.

    ``num`` and ``den`` map ``(m, n)`` to values.  Uses the Leibniz expansion
    of ``num = Q * den`` solved for the highest partial of ``Q``.
    """
    q = {}
    inv = 1 / den[(0, 0)]
    for total in range(order + 1):
        for m in range(total, -1, -1):
            n = total - m
            acc = num[(m, n)]
            for i in range(m + 1):
                for j in range(n + 1):
                    if i == m and j == n:
                        continue
                    acc = acc - math.comb(m, i) * math.comb(n, j) * q[(i, j)] * den[(m - i, n - j)]
            q[(m, n)] = acc * inv
    return q


class TransformedFields:
    """Lazy access to ``a, b, d, f`` and their partials."""

    def __init__(self, fields: CoefficientFields):
        self.fields = fields

    def partials(self, x, y, order: int = 2, mp: bool = False):
        """Return ``{'a': {(m,n): val}, 'b': ..., 'd': ..., 'f': ...}``.

        With ``mp=True`` the fields are evaluated through mpmath (scalar
        inputs only), which the truncation tests use to get past double
        precision cancellation.
        """
        fl = self.fields

        def ev(field, m, n):
            if mp:
                return field.partial_mp(m, n, x, y)
            return field.partial(m, n, x, y)

        alpha = {}
        for total in range(order + 2):
            for m in range(total + 1):
                alpha[(m, total - m)] = ev(fl.alpha, m, total - m)
        a0 = alpha[(0, 0)]
        if not mp and np.any(np.asarray(a0) <= 0):
            raise NonPositiveDiffusion("diffusion coefficient alpha must be positive")
        if mp and a0 <= 0:
            raise NonPositiveDiffusion("diffusion coefficient alpha must be positive")
        keys = [(m, t - m) for t in range(order + 1) for m in range(t + 1)]
        num_a = {k: alpha[(k[0] + 1, k[1])] - ev(fl.beta1, *k) for k in keys}
        num_b = {k: alpha[(k[0], k[1] + 1)] - ev(fl.beta2, *k) for k in keys}
        num_d = {k: -ev(fl.kappa, *k) for k in keys}
        num_f = {k: -ev(fl.phi, *k) for k in keys}
        return {
            "a": _quotient_partials(num_a, alpha, order),
            "b": _quotient_partials(num_b, alpha, order),
            "d": _quotient_partials(num_d, alpha, order),
            "f": _quotient_partials(num_f, alpha, order),
        }


def transform(fields: CoefficientFields) -> TransformedFields:
    return TransformedFields(fields)


# --------------------------------------------------------------------------
# boundary data
# --------------------------------------------------------------------------

def chain_rule_derivs(field: ScalarField, curve, t):
    """``g(t) = G(p(t), q(t))`` and its first three t-derivatives."""
    (p, q), (p1, q1), (p2, q2), (p3, q3) = curve.derivs(t, 3)

    def G(m, n):
        return field.partial(m, n, p, q)

    gx, gy = G(1, 0), G(0, 1)
    gxx, gxy, gyy = G(2, 0), G(1, 1), G(0, 2)
    gxxx, gxxy, gxyy, gyyy = G(3, 0), G(2, 1), G(1, 2), G(0, 3)
    g0 = G(0, 0)
    g1 = gx * p1 + gy * q1
    g2 = gxx * p1 ** 2 + 2 * gxy * p1 * q1 + gyy * q1 ** 2 + gx * p2 + gy * q2
    g3 = (gxxx * p1 ** 3 + 3 * gxxy * p1 ** 2 * q1 + 3 * gxyy * p1 * q1 ** 2 + gyyy * q1 ** 3
          + 3 * gxx * p1 * p2 + 3 * gxy * (p1 * q2 + p2 * q1) + 3 * gyy * q1 * q2
          + gx * p3 + gy * q3)
    return g0, g1, g2, g3


class BoundaryData:
    """Dirichlet data along each boundary curve, with t-derivatives to order 3.

    Either a spatial field restricted to the curves (chain rule), or one
    callable per curve ``func(t) -> (g, g', g'', g''')``.
    """

    def __init__(self, curves, field: ScalarField | None = None, per_curve=None):
        if (field is None) == (per_curve is None):
            raise ValueError("give exactly one of field or per_curve")
        self.curves = list(curves)
        self.field = field
        self.per_curve = per_curve

    def values(self, curve_index: int, t):
        if self.field is not None:
            return chain_rule_derivs(self.field, self.curves[curve_index], t)
        return tuple(np.asarray(v, dtype=float) for v in self.per_curve[curve_index](t))

    def __call__(self, curve_index, t):
        return self.values(curve_index, t)[0]


def boundary_derivatives(bd: BoundaryData, curve_index: int, t):
    return bd.values(curve_index, t)


# --------------------------------------------------------------------------
# problem specification
# --------------------------------------------------------------------------

@dataclass
class ProblemSpec:
    domain: Domain
    fields: CoefficientFields
    boundary: BoundaryData
    exact: ScalarField | None = None
    name: str = "custom"

    def __post_init__(self):
        self.transformed = TransformedFields(self.fields)


def _as_expr(f):
    if isinstance(f, SymbolicField):
        return f.expr
    if isinstance(f, str):
        return SymbolicField(f).expr
    return sp.sympify(f)


def pde_source_expr(u, alpha, beta1, beta2, kappa) -> sp.Expr:
    """``-div(alpha grad u) + beta . grad u + kappa u`` as a sympy expression."""
    u, alpha, beta1, beta2, kappa = (_as_expr(v) for v in (u, alpha, beta1, beta2, kappa))
    ux = sp.diff(u, X)
    uy = sp.diff(u, Y)
    return (-(sp.diff(alpha * ux, X) + sp.diff(alpha * uy, Y))
            + beta1 * ux + beta2 * uy + kappa * u)


def make_manufactured(u, alpha, beta1, beta2, kappa, domain: Domain,
                      name: str = "manufactured") -> ProblemSpec:
    """Problem whose exact solution is ``u``: source and boundary data by substitution."""
    phi = SymbolicField(pde_source_expr(u, alpha, beta1, beta2, kappa))
    fields = CoefficientFields(*(SymbolicField(_as_expr(v)) for v in (alpha, beta1, beta2, kappa)),
                               phi)
    exact = u if isinstance(u, SymbolicField) else SymbolicField(_as_expr(u))
    boundary = BoundaryData(domain.curves, field=exact)
    return ProblemSpec(domain, fields, boundary, exact=exact, name=name)


def pde_residual(problem: ProblemSpec, x, y):
    """``-div(alpha grad u) + beta . grad u + kappa u - phi`` for the exact solution.

    Evaluated numerically from the field partials, independent of how phi
    was produced.
    """
    u = problem.exact
    fl = problem.fields
    ux, uy = u.partial(1, 0, x, y), u.partial(0, 1, x, y)
    lap = u.partial(2, 0, x, y) + u.partial(0, 2, x, y)
    al = fl.alpha(x, y)
    div = al * lap + fl.alpha.partial(1, 0, x, y) * ux + fl.alpha.partial(0, 1, x, y) * uy
    return (-div + fl.beta1(x, y) * ux + fl.beta2(x, y) * uy + fl.kappa(x, y) * u(x, y)
            - fl.phi(x, y))


__all__ = [
    "BoundaryData", "CoefficientFields", "ProblemSpec", "TransformedFields",
    "boundary_derivatives", "chain_rule_derivs", "constant", "make_manufactured",
    "pde_residual", "pde_source_expr", "transform",
]
