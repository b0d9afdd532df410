"""Closed-form coefficients of the boundary stencil, one family per tangent regime.

``vertical`` applies when the boundary tangent is steep (|q'| >= |p'|) and
eliminates x-derivatives first; ``horizontal`` is its mirror image.  Each
family provides

* ``transform``: the 6 ``s`` and 12 ``z`` coefficients expressing the
  eliminated derivatives of ``u`` at the anchor in terms of the three kept
  ones plus ``f``/``g`` data,
* ``taylor``: the 13 ``xi``, 9 ``eta`` and 18 ``omega`` coefficients of the
  reduced local Taylor polynomial,
* ``matrix``: the 6x4 block of the homogeneous system for one stencil node,
* ``rhs_terms``: the contribution of one stencil node to the right-hand side.

Lists are 1-based (index 0 is ``None``) so the code lines up with the usual
subscripts.  Only ``+ - * /`` are used so inputs may be numpy arrays.
"""

from __future__ import annotations


def _one_based(*vals):
    return [None, *vals]


# --------------------------------------------------------------------------
# steep tangent (|q'| >= |p'|)
# --------------------------------------------------------------------------

def vertical_denominators(p1, q1):
    return (q1, p1 * p1 - q1 * q1, 3 * p1 ** 4 - 4 * p1 ** 2 * q1 ** 2 + q1 ** 4,
            3 * p1 * p1 - q1 * q1)


def vertical_transform(p1, p2, p3, q1, q2, q3, a, b, d, a10, a01, b10, b01, d10, d01):
    P2 = p1 * p1
    Q2 = q1 * q1
    D2 = P2 - Q2
    D4 = 3 * P2 * P2 - 4 * P2 * Q2 + Q2 * Q2
    D3 = 3 * P2 - Q2

    s1 = -p1 / q1
    s2 = (b * p1 ** 3 - a * P2 * q1 - p1 * q2 + p2 * q1) / (q1 * D2)
    s3 = 2 * q1 * p1 / D2
    s4 = (b10 * p1 ** 6
          - q1 * (3 * b * b + a10 - 3 * b01 - 2 * d) * p1 ** 5
          + ((4 * a * b - 3 * a01 - b10) * Q2 - a * q2) * p1 ** 4
          + ((a10 - a * a - 3 * b01 - 2 * d) * q1 ** 3 + (a * p2 + 6 * b * q2) * q1 - q3) * p1 ** 3
          + (3 * a01 * Q2 * Q2 - (3 * a * q2 + 6 * b * p2) * Q2 + p3 * q1 + 3 * p2 * q2) * P2
          + 3 * (a * p2 * Q2 - p2 * p2 + q1 * q3 / 3 - q2 * q2) * q1 * p1
          + 3 * p2 * q2 * Q2
          - p3 * q1 ** 3) / (Q2 * D4)
    s5 = (3 * a * P2 * q1 ** 3 - a * P2 * P2 * q1 - b * p1 ** 5 - 5 * b * p1 ** 3 * Q2
          + 3 * p1 ** 3 * q2 - 3 * P2 * p2 * q1 + 3 * p1 * Q2 * q2 - 3 * p2 * q1 ** 3) / (q1 * D4)
    s6 = -p1 * (P2 - 3 * Q2) / (q1 * D3)

    z1 = -1 / q1
    z2 = d * P2 / D2
    z3 = -P2 / D2
    z4 = (b * P2 - q2) / (q1 * D2)
    z5 = 1 / D2
    z6 = p1 * (d10 * P2 * P2
               - 3 * q1 * (b * d - d01) * p1 ** 3
               + Q2 * (a * d - d10) * P2
               + (3 * d * q1 * q2 - 3 * d01 * q1 ** 3) * p1
               - 3 * d * p2 * Q2) / (q1 * D4)
    z7 = -p1 * (a * P2 * q1 - 3 * b * p1 ** 3 + 3 * p1 * q2 - 3 * p2 * q1) / D4
    z8 = -3 * P2 / D3
    z9 = (b10 * p1 ** 5
          - 3 * q1 * (b * b - b01 - d) * P2 * P2
          + ((a * b - b10) * Q2 - a * q2) * p1 ** 3
          + (6 * b * q1 * q2 - 3 * (d + b01) * q1 ** 3 - q3) * P2
          - 3 * p2 * (b * Q2 - q2) * p1
          + q3 * Q2 - 3 * q1 * q2 * q2) / (Q2 * D4)
    z10 = -p1 ** 3 / (q1 * D3)
    z11 = (a * p1 ** 3 - 3 * b * P2 * q1 - 3 * p1 * p2 + 3 * q1 * q2) / (q1 * D4)
    z12 = 1 / (q1 * D3)
    return (_one_based(s1, s2, s3, s4, s5, s6),
            _one_based(z1, z2, z3, z4, z5, z6, z7, z8, z9, z10, z11, z12))


def vertical_taylor(s, z, a, b, d, a10, a01, b10, b01, d10, d01):
    xi = _one_based(
        s[1],
        s[2] / 2,
        s[4] / 6,
        -(b * s[1] + a + s[2]) / 2,
        -((d + b01) * s[1] + s[2] * b + s[4] + a01) / 2,
        (a * a + (b * s[1] + s[2]) * a - s[1] * b10 - a10 - d) / 6,
        s[3] / 2,
        s[5] / 6,
        -s[3] / 2,
        -(s[3] * b + a + s[5]) / 2,
        (s[3] * a - b) / 6,
        s[6] / 6,
        -s[6] / 2,
    )
    eta = _one_based(
        -z[3] / 2,
        -z[7] / 6,
        (z[3] + 1) / 2,
        (z[3] * b + z[7]) / 2,
        -(z[3] + 1) * a / 6,
        -z[8] / 6,
        (z[8] + 1) / 2,
        -z[10] / 6,
        z[10] / 2,
    )
    omega = _one_based(
        -z[2] / 2,
        -z[6] / 6,
        (z[2] - d) / 2,
        (z[2] * b - d01 + z[6]) / 2,
        (a * (d - z[2]) - d10) / 6,
        -z[1],
        -z[4] / 2,
        -z[9] / 6,
        (b * z[1] + z[4]) / 2,
        (z[1] * (b01 + d) + z[4] * b + z[9]) / 2,
        (b10 * z[1] - a * (b * z[1] + z[4])) / 6,
        -z[5] / 2,
        -z[11] / 6,
        z[5] / 2,
        (z[5] * b + z[11]) / 2,
        -z[5] * a / 6,
        -z[12] / 6,
        z[12] / 2,
    )
    return xi, eta, omega


def vertical_matrix(xi, mu, tau):
    """Rows of the 6x4 block as a list of 4-lists (column 4 is identically 0)."""
    lin = tau * xi[1] + mu
    quad = mu * mu * xi[9] + tau * tau * xi[7] + mu * tau
    cub = mu * mu * tau * xi[13] + tau ** 3 * xi[12] - mu ** 3 / 6 + mu * tau * tau / 2
    quad0 = mu * mu * xi[4] + tau * tau * xi[2]
    cub1 = mu ** 3 * xi[11] + mu * mu * tau * xi[10] + tau ** 3 * xi[8]
    cub0 = mu ** 3 * xi[6] + mu * mu * tau * xi[5] + tau ** 3 * xi[3]
    zero = 0 * mu
    return [
        [lin, zero, zero, zero],
        [quad, zero, zero, zero],
        [cub, zero, zero, zero],
        [quad0, lin, zero, zero],
        [cub1, quad, zero, zero],
        [cub0, quad0, lin, zero],
    ]


def vertical_rhs_terms(c0, c1, c2, c3, mu, tau, eta, omega, f, f10, f01, g, g1, g2, g3):
    """Coefficients of h^0..h^3 contributed by one stencil node."""
    yy = eta[1] * f + g * omega[1] + g1 * omega[7] + g2 * omega[12]
    xx = eta[3] * f + g * omega[3] + g1 * omega[9] + g2 * omega[14]
    lin = g1 * omega[6] * tau
    t0 = c0 * g
    t1 = c0 * lin + c1 * g
    t2 = c0 * (yy * tau * tau + mu * mu * xx) + c1 * lin + c2 * g
    yyy = (eta[2] * f + eta[6] * f01 + eta[8] * f10
           + g * omega[2] + g1 * omega[8] + g2 * omega[13] + g3 * omega[17])
    xxy = (eta[4] * f + eta[7] * f01 + eta[9] * f10
           + g * omega[4] + g1 * omega[10] + g2 * omega[15] + g3 * omega[18])
    xxx = eta[5] * f + omega[5] * g + omega[11] * g1 + omega[16] * g2 + f10 / 6
    t3 = (c0 * (yyy * tau ** 3 + mu * mu * xxy * tau + mu ** 3 * xxx)
          + c1 * yy * tau * tau + c2 * lin + c1 * xx * mu * mu + c3 * g)
    return t0, t1, t2, t3


# --------------------------------------------------------------------------
# flat tangent (|q'| <= |p'|)
# --------------------------------------------------------------------------

def horizontal_denominators(p1, q1):
    return (p1, p1 * p1 - q1 * q1, p1 ** 4 - 4 * p1 ** 2 * q1 ** 2 + 3 * q1 ** 4,
            p1 * p1 - 3 * q1 * q1)


def horizontal_transform(p1, p2, p3, q1, q2, q3, a, b, d, a10, a01, b10, b01, d10, d01):
    P2 = p1 * p1
    Q2 = q1 * q1
    D2 = P2 - Q2
    D4 = P2 * P2 - 4 * P2 * Q2 + 3 * Q2 * Q2
    D3 = P2 - 3 * Q2

    s1 = -q1 / p1
    s2 = ((b * Q2 - q2) * p1 - a * q1 ** 3 + p2 * q1) / (p1 * D2)
    s3 = -2 * p1 * q1 / D2
    s4 = (a01 * q1 ** 6
          - 3 * (a * a - a10 + b01 / 3 - 2 * d / 3) * p1 * q1 ** 5
          + (P2 * (4 * a * b - a01 - 3 * b10) - b * p2) * Q2 * Q2
          + (p1 ** 3 * (b01 - b * b - 3 * a10 - 2 * d) + (6 * a * p2 + b * q2) * p1 - p3) * q1 ** 3
          + (3 * b10 * P2 * P2 - 3 * (2 * a * q2 + b * p2) * P2 + p1 * q3 + 3 * p2 * q2) * Q2
          + 3 * p1 * (b * P2 * q2 + p1 * p3 / 3 - p2 * p2 - q2 * q2) * q1
          - p1 ** 3 * q3
          + 3 * P2 * p2 * q2) / (P2 * D4)
    s5 = (3 * b * p1 ** 3 * Q2 - 5 * a * P2 * q1 ** 3 - a * q1 ** 5 - b * p1 * Q2 * Q2
          - 3 * p1 ** 3 * q2 + 3 * P2 * p2 * q1 - 3 * p1 * Q2 * q2 + 3 * p2 * q1 ** 3) / (p1 * D4)
    s6 = (q1 ** 3 - 3 * P2 * q1) / (p1 * D3)

    z1 = -1 / p1
    z2 = -d * Q2 / D2
    z3 = Q2 / D2
    z4 = (-a * Q2 + p2) / (p1 * D2)
    z5 = -1 / D2
    z6 = -q1 * (3 * a * d * p1 * q1 ** 3
                - b * d * P2 * Q2
                + d01 * P2 * Q2
                - d01 * Q2 * Q2
                + 3 * d10 * p1 ** 3 * q1
                - 3 * d10 * p1 * q1 ** 3
                + 3 * d * P2 * q2
                - 3 * d * p1 * p2 * q1) / (p1 * D4)
    z7 = 3 * q1 * (a * q1 ** 3 - b * p1 * Q2 / 3 + p1 * q2 - p2 * q1) / D4
    z8 = q1 ** 3 / (p1 * D3)
    z9 = (a01 * q1 ** 5
          - 3 * p1 * (a * a - a10 - d) * Q2 * Q2
          + ((a * b - a01) * P2 - b * p2) * q1 ** 3
          + (-3 * (a10 + d) * p1 ** 3 + 6 * a * p1 * p2 - p3) * Q2
          - 3 * q2 * (a * P2 - p2) * q1
          + P2 * p3
          - 3 * p1 * p2 * p2) / (P2 * D4)
    z10 = 3 * Q2 / D3
    z11 = (b * q1 ** 3 - 3 * a * p1 * Q2 + 3 * p1 * p2 - 3 * q1 * q2) / (p1 * D4)
    z12 = -1 / (p1 * D3)
    return (_one_based(s1, s2, s3, s4, s5, s6),
            _one_based(z1, z2, z3, z4, z5, z6, z7, z8, z9, z10, z11, z12))


def horizontal_taylor(s, z, a, b, d, a10, a01, b10, b01, d10, d01):
    xi = _one_based(
        -(a * s[1] + b + s[2]) / 2,
        (b * b + (a * s[1] + s[2]) * b - s[1] * a01 - b01 - d) / 6,
        s[1],
        (s[1] * (-d - a10) - s[2] * a - s[4] - b10) / 2,
        s[2] / 2,
        s[4] / 6,
        -s[3] / 2,
        (s[3] * b - a) / 6,
        -(s[3] * a + b + s[5]) / 2,
        s[3] / 2,
        s[5] / 6,
        -s[6] / 2,
        s[6] / 6,
    )
    eta = _one_based(
        (z[3] + 1) / 2,
        -(z[3] + 1) * b / 6,
        (z[3] * a + z[7]) / 2,
        -z[3] / 2,
        -z[7] / 6,
        z[8] / 2,
        -z[8] / 6,
        (z[10] + 1) / 2,
        -z[10] / 6,
    )
    omega = _one_based(
        (z[2] - d) / 2,
        ((-z[2] + d) * b - d01) / 6,
        (z[2] * a - d10 + z[6]) / 2,
        -z[2] / 2,
        -z[6] / 6,
        (a * z[1] + z[4]) / 2,
        (a01 * z[1] - (a * z[1] + z[4]) * b) / 6,
        -z[1],
        ((a10 + d) * z[1] + z[4] * a + z[9]) / 2,
        -z[4] / 2,
        -z[9] / 6,
        z[5] / 2,
        -z[5] * b / 6,
        (z[5] * a + z[11]) / 2,
        -z[5] / 2,
        -z[11] / 6,
        z[12] / 2,
        -z[12] / 6,
    )
    return xi, eta, omega


def horizontal_matrix(xi, mu, tau):
    lin = mu * xi[3] + tau
    quad = mu * mu * xi[10] + tau * tau * xi[7] + mu * tau
    cub = mu * xi[12] * tau * tau - tau ** 3 / 6 + mu * mu * tau / 2 + mu ** 3 * xi[13]
    quad0 = mu * mu * xi[5] + tau * tau * xi[1]
    cub1 = mu ** 3 * xi[11] + mu * tau * tau * xi[9] + tau ** 3 * xi[8]
    cub0 = mu ** 3 * xi[6] + mu * tau * tau * xi[4] + tau ** 3 * xi[2]
    zero = 0 * mu
    return [
        [lin, zero, zero, zero],
        [quad, zero, zero, zero],
        [cub, zero, zero, zero],
        [quad0, lin, zero, zero],
        [cub1, quad, zero, zero],
        [cub0, quad0, lin, zero],
    ]


def horizontal_rhs_terms(c0, c1, c2, c3, mu, tau, eta, omega, f, f10, f01, g, g1, g2, g3):
    xx = eta[4] * f + g * omega[4] + g1 * omega[10] + g2 * omega[15]
    yy = eta[1] * f + g * omega[1] + g1 * omega[6] + g2 * omega[12]
    lin = g1 * omega[8] * mu
    t0 = g * c0
    t1 = c0 * lin + c1 * g
    t2 = g * c2 + lin * c1 + (xx * mu * mu + tau * tau * yy) * c0
    xxx = (eta[5] * f + eta[7] * f01 + eta[9] * f10
           + g * omega[5] + g1 * omega[11] + g2 * omega[16] + g3 * omega[18])
    xyy = (eta[3] * f + eta[6] * f01 + eta[8] * f10
           + g * omega[3] + g1 * omega[9] + g2 * omega[14] + g3 * omega[17])
    yyy = g * omega[2] + g1 * omega[7] + g2 * omega[13] + f * eta[2] + f01 / 6
    t3 = ((xxx * mu ** 3 + tau * tau * xyy * mu + tau ** 3 * yyy) * c0
          + c1 * xx * mu * mu + lin * c2 + c1 * yy * tau * tau + g * c3)
    return t0, t1, t2, t3


FAMILIES = {
    1: (vertical_transform, vertical_taylor, vertical_matrix, vertical_rhs_terms,
        vertical_denominators),
    2: (horizontal_transform, horizontal_taylor, horizontal_matrix, horizontal_rhs_terms,
        horizontal_denominators),
}
