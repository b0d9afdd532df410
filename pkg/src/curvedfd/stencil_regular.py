"""Compact 9-point fourth-order stencil at regular centers.

For ``Δu + a u_x + b u_y + d u = f`` the scheme reads

    (1/h^2) sum_{r,l} C[r,l] u(x + r h, y + l h) = F

with ``C`` polynomial in ``h`` (degree <= 4) whose coefficients involve
``a, b, d`` and their partials up to order 2, and
``F = f + h^2 (a f_x + b f_y + Δf) / 12``.

All arithmetic is plain ``+ - * /`` so the functions accept numpy arrays
(one entry per center) as well as mpmath scalars.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OFFSETS = [(r, l) for r in (-1, 0, 1) for l in (-1, 0, 1)]


@dataclass
class RegularStencil:
    """Coefficients ``C[r+1, l+1]`` and right-hand side ``F`` (array-valued ok)."""

    C: object
    F: object
    h: float

    def coefficient(self, r: int, l: int):
        return self.C[r + 1][l + 1]


def regular_coefficients(tf: dict, h):
    """Return a dict ``(r, l) -> C_{r,l}`` for transformed partials ``tf``."""
    a, b, d = tf["a"], tf["b"], tf["d"]
    a0, ax, ay = a[(0, 0)], a[(1, 0)], a[(0, 1)]
    b0, bx, by = b[(0, 0)], b[(1, 0)], b[(0, 1)]
    d0, dx, dy = d[(0, 0)], d[(1, 0)], d[(0, 1)]
    lap_a = a[(2, 0)] + a[(0, 2)]
    lap_b = b[(2, 0)] + b[(0, 2)]
    lap_d = d[(2, 0)] + d[(0, 2)]
    h2 = h * h
    h3 = h2 * h
    h4 = h3 * h

    side_x2 = a0 * a0 + a0 * b0 + d0 + 2 * ax + ay + bx
    side_x3 = a0 * (ax + d0) + b0 * ay + 2 * dx + lap_a
    side_y2 = b0 * b0 + a0 * b0 + ay + bx + 2 * by + d0
    side_y3 = a0 * bx + b0 * (by + d0) + 2 * dy + lap_b
    anti2 = a0 * b0 + ay + bx
    bdy = b0 * dy

    # integer numerators over a common 24 keep the arithmetic exact for mpmath inputs
    C = {
        (-1, -1): (4 - 2 * (a0 + b0) * h) / 24,
        (-1, 0): (16 - 8 * a0 * h + 2 * side_x2 * h2 - side_x3 * h3) / 24,
        (-1, 1): (4 - 2 * (a0 - b0) * h - 2 * anti2 * h2) / 24,
        (0, -1): (16 - 8 * b0 * h + 2 * side_y2 * h2 - side_y3 * h3 + 2 * bdy * h4) / 24,
        (0, 0): (-80
                 - 4 * (a0 * a0 + a0 * b0 + b0 * b0 - 4 * d0 + 2 * ax + ay + bx + 2 * by) * h2
                 + 2 * (a0 * dx + lap_d) * h4) / 24,
        (0, 1): (16 + 8 * b0 * h + 2 * side_y2 * h2 + side_y3 * h3) / 24,
        (1, -1): (4 + 2 * (a0 - b0) * h - 2 * anti2 * h2 - 2 * bdy * h4) / 24,
        (1, 0): (16 + 8 * a0 * h + 2 * side_x2 * h2 + side_x3 * h3 + 2 * bdy * h4) / 24,
        (1, 1): (4 + 2 * (a0 + b0) * h) / 24,
    }
    return C


def regular_rhs(tf: dict, h):
    a, b, f = tf["a"], tf["b"], tf["f"]
    lap_f = f[(2, 0)] + f[(0, 2)]
    return f[(0, 0)] + (a[(0, 0)] * f[(1, 0)] + b[(0, 0)] * f[(0, 1)] + lap_f) * h * h / 12


def regular_stencil(tf: dict, h) -> RegularStencil:
    """Stencil at one or many regular centers.

    ``tf`` is the output of ``TransformedFields.partials(x, y, order=2)``.
    With array inputs ``C`` has shape ``(..., 3, 3)``; with scalars it is a
    nested 3x3 list so that mpmath values survive untouched.
    """
    coeffs = regular_coefficients(tf, h)
    F = regular_rhs(tf, h)
    sample = coeffs[(0, 0)]
    if isinstance(sample, np.ndarray):
        C = np.empty(sample.shape + (3, 3))
        for (r, l), val in coeffs.items():
            C[..., r + 1, l + 1] = val
    else:
        C = [[coeffs[(r, l)] for l in (-1, 0, 1)] for r in (-1, 0, 1)]
    return RegularStencil(C, F, h)
