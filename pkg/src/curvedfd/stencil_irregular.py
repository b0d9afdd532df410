"""Fourth-order compact stencil at irregular centers.

At an irregular center the stencil is anchored at the foot ``(x°, y°)`` of
the orthogonal projection onto the boundary.  The PDE, two of its first
derivatives and the Dirichlet data along the curve (up to third
t-derivatives) eliminate seven of the ten derivatives of ``u`` at the foot,
leaving three free ones.  Requiring the stencil to annihilate those three up
to ``O(h^4)`` gives six homogeneous equations for the coefficients

    C_{r,l} = c_{r,l,0} + c_{r,l,1} h + c_{r,l,2} h^2,   (r, l) in S,

solved in the minimum-norm sense with ``c_{0,0,0}`` pinned and then
rescaled so that ``sum c_{r,l,0} = 1``.  The row of the linear system is
``sum C_{r,l} u_{i+r,j+l} = F`` with ``F`` an explicit cubic in ``h``.

Two coefficient families exist: case 1 for steep tangents (|q'| >= |p'|)
and case 2 for flat ones; see :mod:`curvedfd._closed_forms`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _closed_forms as cf
from .exceptions import (ConditioningFloor, NormalizationDegenerate, StencilSingular,
                         ZeroTangent)
from .geometry import SQRT3
from .grid import CENTER, MIN_SUPPORT, OFFSETS, IrregularContext, IrregularSet

COEFF_NAMES = ("a", "b", "d", "a10", "a01", "b10", "b01", "d10", "d01")
CONDITIONING_FLOOR = 1e-8
RESIDUAL_TOL = 1e-10
NORMALIZATION_TOL = 1e-10
# powers of |T| = |(p', q')| giving each denominator its natural scale
_DEN_POWERS = (1, 2, 4, 2)


@dataclass(frozen=True)
class CaseTag:
    case: int
    near_diagonal: bool = False  # tangent ratio close to +-1
    near_third: bool = False  # close to +-sqrt(3) (case 1) or +-1/sqrt(3) (case 2)

    @property
    def degenerate(self):
        return self.near_diagonal or self.near_third


@dataclass
class TransformCoeffs:
    s: list
    z: list
    min_denominator: float


@dataclass
class TaylorBasisCoeffs:
    xi: list
    eta: list
    omega: list


@dataclass
class IrregularStencil:
    """Stencil at one center: ``c[(r, l)] = (c0, c1, c2, c3)`` for ``(r, l)`` in S."""

    c: dict
    C: dict
    F: float
    residual: float
    case: int
    min_denominator: float
    index: tuple | None = None


# --------------------------------------------------------------------------
# single-center building blocks
# --------------------------------------------------------------------------

def classify_case(p1, q1, eps_slope: float = 1e-6) -> CaseTag:
    """Pick the coefficient family and flag nearby degenerate tangent ratios."""
    if p1 == 0 and q1 == 0:
        raise ZeroTangent("boundary tangent vanishes")
    tol = eps_slope * math.hypot(p1, q1)
    case = 1 if abs(q1) >= abs(p1) else 2
    diag = min(abs(q1 - p1), abs(q1 + p1)) < tol
    c = SQRT3 if case == 1 else 1 / SQRT3
    third = min(abs(q1 - c * p1), abs(q1 + c * p1)) < tol
    return CaseTag(case, diag, third)


def normalized_denominators(case, p1, q1):
    """Denominators of the s/z formulas, each divided by its natural |T|-power."""
    dens = (cf.vertical_denominators if case == 1 else cf.horizontal_denominators)(p1, q1)
    tn = np.hypot(p1, q1)
    return [np.abs(dv) / tn ** k for dv, k in zip(dens, _DEN_POWERS)]


def transform_coeffs(case, geo, co, floor: float = CONDITIONING_FLOOR) -> TransformCoeffs:
    """``s1..s6`` and ``z1..z12`` for curve derivatives ``geo = (p1, p2, p3, q1, q2, q3)``.

    ``co`` maps ``a, b, d, a10, ..., d01`` to values at the foot.
    """
    case = getattr(case, "case", case)
    p1, q1 = geo[0], geo[3]
    md = float(min(normalized_denominators(case, p1, q1)))
    if not md >= floor:
        raise ConditioningFloor(
            f"denominator {md:.3e} below conditioning floor for tangent ({p1}, {q1})")
    s, z = cf.FAMILIES[case][0](*geo, *(co[k] for k in COEFF_NAMES))
    return TransformCoeffs(s, z, md)


def taylor_coeffs(case, sz: TransformCoeffs, co) -> TaylorBasisCoeffs:
    case = getattr(case, "case", case)
    xi, eta, omega = cf.FAMILIES[case][1](sz.s, sz.z, *(co[k] for k in COEFF_NAMES))
    return TaylorBasisCoeffs(xi, eta, omega)


def stencil_matrix(case, xi, mu, tau) -> np.ndarray:
    """The 6x4 block of one stencil node at offset ``(mu, tau)`` from the foot."""
    case = getattr(case, "case", case)
    return np.array(cf.FAMILIES[case][2](xi, mu, tau), dtype=float)


def solve_coefficients(S, A: dict):
    """Solve ``sum_{(r,l) in S} A[(r,l)] c_{r,l} = 0`` with ``c_{0,0,0} = 1``, ``sum c_0 = 1``.

    Returns ``(c, residual)`` with ``c[(r, l)] = (c0, c1, c2, 0)``.
    """
    offsets = [o for o in OFFSETS if o in S]
    B = np.zeros((1, 6, 3 * len(OFFSETS)))
    member = np.zeros((1, len(OFFSETS)), dtype=bool)
    mu = np.zeros((1, len(OFFSETS)))
    tau = np.zeros((1, len(OFFSETS)))
    for o in offsets:
        k = OFFSETS.index(o)
        member[0, k] = True
        B[0, :, 3 * k:3 * k + 3] = np.asarray(A[o])[:, :3]
    c, residual, sum0 = _solve_batch(B, member, mu, tau)
    _raise_on_failure(residual, sum0, member)
    return {o: (*c[0, OFFSETS.index(o)], 0.0) for o in offsets}, float(residual[0])


def build_rhs(case, c: dict, eta, omega, f, f10, f01, g, mu: dict, tau: dict, h):
    """Right-hand side ``F`` as the cubic in ``h`` summed over the support set."""
    case = getattr(case, "case", case)
    terms = cf.FAMILIES[case][3]
    total = [0.0, 0.0, 0.0, 0.0]
    for o, (c0, c1, c2, c3) in c.items():
        t = terms(c0, c1, c2, c3, mu[o], tau[o], eta, omega, f, f10, f01, *g)
        total = [a + b for a, b in zip(total, t)]
    return total[0] + h * (total[1] + h * (total[2] + h * total[3]))


# --------------------------------------------------------------------------
# batched construction
# --------------------------------------------------------------------------

@dataclass
class AnchorData:
    """Data at the foot of every center: curve derivatives, PDE coefficients, boundary data."""

    geo: np.ndarray  # (6, M): p1, p2, p3, q1, q2, q3
    co: dict  # COEFF_NAMES -> (M,)
    f: np.ndarray  # (3, M): f, f10, f01
    g: np.ndarray  # (4, M): g, g', g'', g'''


def anchor_data(problem, curve, t, fx, fy) -> AnchorData:
    """Evaluate everything the closed forms need at the feet ``(fx, fy)``."""
    curve = np.asarray(curve)
    t = np.asarray(t, dtype=float)
    M = len(t)
    geo = np.empty((6, M))
    g = np.empty((4, M))
    for ci, crv in enumerate(problem.domain.curves):
        m = curve == ci
        if not m.any():
            continue
        _, (p1, q1), (p2, q2), (p3, q3) = crv.derivs(t[m], 3)
        geo[:, m] = np.array([p1, p2, p3, q1, q2, q3])
        g[:, m] = np.array([np.broadcast_to(v, (m.sum(),))
                            for v in problem.boundary.values(ci, t[m])])
    tf = problem.transformed.partials(np.asarray(fx, float), np.asarray(fy, float), order=1)
    co = {}
    for name in "abd":
        co[name] = np.broadcast_to(tf[name][(0, 0)], (M,))
        co[name + "10"] = np.broadcast_to(tf[name][(1, 0)], (M,))
        co[name + "01"] = np.broadcast_to(tf[name][(0, 1)], (M,))
    f = np.array([np.broadcast_to(tf["f"][k], (M,)) for k in ((0, 0), (1, 0), (0, 1))])
    return AnchorData(geo, co, f, g)


@dataclass
class StencilBatch:
    """Irregular stencils for many centers; arrays indexed ``[center, offset]`` in OFFSETS order."""

    case: np.ndarray
    c: np.ndarray  # (M, 9, 4)
    C: np.ndarray  # (M, 9)
    F: np.ndarray  # (M,)
    residual: np.ndarray
    sum0: np.ndarray  # sum of c_{.,0} before rescaling
    min_denominator: np.ndarray
    member: np.ndarray
    mu: np.ndarray
    tau: np.ndarray
    A: np.ndarray  # (M, 9, 6, 4)

    def __len__(self):
        return len(self.F)

    def ok(self):
        # fewer than four support nodes can satisfy the algebra only trivially
        return ((self.member.sum(axis=1) >= MIN_SUPPORT) & (self.residual <= RESIDUAL_TOL)
                & (np.abs(self.sum0) >= NORMALIZATION_TOL)
                & (self.min_denominator >= CONDITIONING_FLOOR))

    def item(self, k, index=None) -> IrregularStencil:
        offs = [o for o, m in zip(OFFSETS, self.member[k]) if m]
        c = {o: tuple(float(x) for x in self.c[k, OFFSETS.index(o)]) for o in offs}
        C = {o: float(self.C[k, OFFSETS.index(o)]) for o in offs}
        return IrregularStencil(c, C, float(self.F[k]), float(self.residual[k]),
                                int(self.case[k]), float(self.min_denominator[k]), index)


def _family_eval(geo, co, mu, tau):
    """Closed forms of both families on all rows; rows pick their own case."""
    p1, q1 = geo[0], geo[3]
    case = np.where(np.abs(q1) >= np.abs(p1), 1, 2)
    args = [co[k] for k in COEFF_NAMES]
    out = {}
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for fam in (1, 2):
            transform, taylor, matrix, _, _ = cf.FAMILIES[fam]
            s, z = transform(*geo, *args)
            xi, eta, omega = taylor(s, z, *args)
            col = [None] + [x[:, None] for x in xi[1:]]
            A = np.array(matrix(col, mu, tau))  # (6, 4, M, 9)
            md = np.min(normalized_denominators(fam, p1, q1), axis=0)
            out[fam] = (xi, eta, omega, np.moveaxis(A, (0, 1), (2, 3)), md)
    pick = case == 1

    def sel(a, b):
        return np.where(pick, a, b)

    eta = [None] + [sel(a, b) for a, b in zip(out[1][1][1:], out[2][1][1:])]
    omega = [None] + [sel(a, b) for a, b in zip(out[1][2][1:], out[2][2][1:])]
    A = np.where(pick[:, None, None, None], out[1][3], out[2][3])
    md = sel(out[1][4], out[2][4])
    return case, eta, omega, A, md


def _pinned_solve(B, pin):
    """Min-norm solution of ``B c = 0`` with ``c[pin] = 1`` for each row of the batch."""
    M, _, n = B.shape
    rows = np.arange(M)
    b = -B[rows, :, pin]
    keep = np.ones((M, n), dtype=bool)
    keep[rows, pin] = False
    Br = B[keep.reshape(M, 1, n).repeat(6, axis=1)].reshape(M, 6, n - 1)
    u, s, vt = np.linalg.svd(Br, full_matrices=False)
    cutoff = 1e-13 * s[:, :1]
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    x = np.einsum("mji,mj,mkj,mk->mi", vt, inv, u, b)
    c = np.ones((M, n))
    c[keep] = x.ravel()
    return c


def _solve_batch(B, member, mu, tau):
    """Solve all centers; returns ``(c (M,9,3), residual, sum0)``."""
    M = B.shape[0]
    pin = np.full(M, 3 * CENTER)
    cols = np.repeat(member, 3, axis=1)
    c = np.where(cols, _pinned_solve(B, pin), 0.0)
    sum0 = c[:, 0::3].sum(axis=1)
    bad = np.abs(sum0) < NORMALIZATION_TOL
    if bad.any():
        # retry with the pin moved to the member farthest from the foot
        spread = np.where(member[bad], np.abs(mu[bad]) + np.abs(tau[bad]), -np.inf)
        spread[:, CENTER] = -np.inf
        c2 = np.where(cols[bad], _pinned_solve(B[bad], 3 * np.argmax(spread, axis=1)), 0.0)
        c[bad] = c2
        sum0[bad] = c2[:, 0::3].sum(axis=1)
    scale = np.where(np.abs(sum0) >= NORMALIZATION_TOL, sum0, 1.0)
    c = c / scale[:, None]
    Bmax = np.abs(B).max(axis=(1, 2))
    cmax = np.abs(c).max(axis=1)
    Bc = np.abs(np.einsum("men,mn->me", B, c)).max(axis=1)
    residual = Bc / np.where(Bmax * cmax > 0, Bmax * cmax, 1.0)
    return c.reshape(M, len(OFFSETS), 3), residual, sum0


def _raise_on_failure(residual, sum0, member, min_den=None, index=None, points=None):
    def where(k):
        idx = None if index is None else tuple(int(v) for v in index[k])
        pt = None if points is None else tuple(float(v) for v in points[k])
        return idx, pt, f" at center {idx}" if idx is not None else ""

    if min_den is not None:
        bad = ~(min_den >= CONDITIONING_FLOOR)
        if bad.any():
            k = int(np.argmax(bad))
            idx, pt, msg = where(k)
            raise ConditioningFloor(f"denominator {min_den[k]:.3e} below conditioning floor{msg}",
                                    index=idx, point=pt)
    bad = np.abs(sum0) < NORMALIZATION_TOL
    if bad.any():
        k = int(np.argmax(bad))
        idx, pt, msg = where(k)
        raise NormalizationDegenerate(f"sum of c_0 vanishes{msg}", index=idx, point=pt)
    bad = ~(residual <= RESIDUAL_TOL)
    if bad.any():
        k = int(np.argmax(np.where(bad, residual, -1)))
        idx, pt, msg = where(k)
        raise StencilSingular(
            f"stencil residual {residual[k]:.3e} exceeds {RESIDUAL_TOL:g}{msg} "
            f"(|S| = {int(member[k].sum())})", index=idx, point=pt)


def build_stencils(anchor: AnchorData, w, v, member, h, *, check=True,
                   index=None, points=None) -> StencilBatch:
    """Build the stencils of many centers at once.

    ``w, v`` are the scaled offsets of each center from its foot and
    ``member`` the (M, 9) support mask.  With ``check`` any failing center
    raises; otherwise failures are reported through ``StencilBatch.ok``.
    """
    w = np.asarray(w, float)
    v = np.asarray(v, float)
    member = np.asarray(member, bool)
    mu = np.array([r for r, _ in OFFSETS])[None, :] + w[:, None]
    tau = np.array([l for _, l in OFFSETS])[None, :] + v[:, None]
    case, eta, omega, A, md = _family_eval(anchor.geo, anchor.co, mu, tau)
    if check:
        _raise_on_failure(np.zeros(len(w)), np.ones(len(w)), member, md, index, points)
    A = np.where(member[:, :, None, None], A, 0.0)
    B = A[..., :3].transpose(0, 2, 1, 3).reshape(len(w), 6, 3 * len(OFFSETS))
    B = np.nan_to_num(B, nan=0.0, posinf=0.0, neginf=0.0)
    c, residual, sum0 = _solve_batch(B, member, mu, tau)
    if check:
        _raise_on_failure(residual, sum0, member, None, index, points)
    c = np.where(member[:, :, None], c, 0.0)
    c4 = np.concatenate([c, np.zeros(c.shape[:2] + (1,))], axis=2)
    C = c[..., 0] + h * (c[..., 1] + h * c[..., 2])

    f, f10, f01 = (x[:, None] for x in anchor.f)
    g = [x[:, None] for x in anchor.g]
    F = np.zeros(len(w))
    col = lambda lst: [None] + [x[:, None] for x in lst[1:]]  # noqa: E731
    eta_c, omega_c = col(eta), col(omega)
    for fam in (1, 2):
        rows = case == fam
        if not rows.any():
            continue
        with np.errstate(invalid="ignore", over="ignore"):
            t = cf.FAMILIES[fam][3](c[..., 0], c[..., 1], c[..., 2], 0.0, mu, tau, eta_c,
                                    omega_c, f, f10, f01, *g)
        tot = [np.where(member, ti, 0.0).sum(axis=1) for ti in t]
        Ff = tot[0] + h * (tot[1] + h * (tot[2] + h * tot[3]))
        F[rows] = Ff[rows]
    return StencilBatch(case, c4, C, F, residual, sum0, md, member, mu, tau, A)


def build_irregular_set(irr: IrregularSet, problem, h, *, check=True) -> StencilBatch:
    """Stencils for every center of an :class:`IrregularSet`."""
    anchor = anchor_data(problem, irr.curve, irr.t, irr.fx, irr.fy)
    return build_stencils(anchor, irr.w, irr.v, irr.member, h, check=check,
                          index=np.column_stack([irr.i, irr.j]),
                          points=np.column_stack([irr.i * h, irr.j * h]))


def build_irregular(ctx: IrregularContext, problem, h) -> IrregularStencil:
    """Stencil of a single irregular center."""
    pr = ctx.projection
    anchor = anchor_data(problem, np.array([pr.curve_index]), np.array([pr.t_star]),
                         np.array([pr.foot[0]]), np.array([pr.foot[1]]))
    member = np.array([[o in ctx.S for o in OFFSETS]])
    batch = build_stencils(anchor, [ctx.w], [ctx.v], member, h,
                           index=np.array([ctx.index]),
                           points=np.array([[ctx.index[0] * h, ctx.index[1] * h]]))
    return batch.item(0, ctx.index)


def write_diagnostics(path, irr: IrregularSet, batch: StencilBatch):
    """CSV with columns ``i, j, case, |S|, w, v, residual, min-denominator``."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["i", "j", "case", "|S|", "w", "v", "residual", "min-denominator"])
        for k in range(len(batch)):
            out.writerow([int(irr.i[k]), int(irr.j[k]), int(batch.case[k]),
                          int(batch.member[k].sum()), f"{irr.w[k]:.17g}", f"{irr.v[k]:.17g}",
                          f"{batch.residual[k]:.6e}", f"{batch.min_denominator[k]:.6e}"])
