"""Closed parametric boundary curves, composite domains, and projection.

A curve is a smooth closed map ``t -> (p(t), q(t))`` on ``[0, period)``.
Membership is answered exactly for radial star curves (polar comparison)
and by winding number for generic curves.  The nearest boundary point of a
grid node is found by a uniform sample scan followed by safeguarded Newton
iteration on the stationarity condition of the squared distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import IntEnum

import numpy as np
import sympy as sp
from scipy.spatial import cKDTree

from .exceptions import NewtonDivergence, NudgeFailed, UnsupportedOrder
from .fields import T, parse_expression

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)
DEGENERATE_RATIOS = (1.0, -1.0, SQRT3, -SQRT3, 1.0 / SQRT3, -1.0 / SQRT3)


class PointClass(IntEnum):
    OUTSIDE = 0
    ON_BOUNDARY = 1
    INSIDE = 2


# --------------------------------------------------------------------------
# curves
# --------------------------------------------------------------------------

class ParametricCurve:
    """Closed smooth curve with derivatives to order 3.

    Subclasses implement ``_derivs(t, order)`` returning a list of
    ``(p^(m), q^(m))`` for ``m = 0..order``.
    """

    kind = "generic"
    period = TWO_PI

    def derivs(self, t, order: int = 0):
        if order < 0 or order > 3:
            raise UnsupportedOrder(f"curve derivatives available up to order 3, got {order}")
        t = np.mod(np.asarray(t, dtype=float), self.period)
        return self._derivs(t, order)

    def eval(self, t):
        return self.derivs(t, 0)[0]

    def _derivs(self, t, order):
        raise NotImplementedError


def curve_eval(curve: ParametricCurve, t, order: int):
    """Position and derivatives ``[(p, q), (p', q'), ...]`` up to ``order``."""
    return curve.derivs(t, order)


class RadialCurve(ParametricCurve):
    """Star curve ``(r(t) cos t, r(t) sin t)``.

    ``r`` is either the leaf profile ``offset + amplitude * sin(frequency * t)``
    or an arbitrary sympy expression in ``t``.
    """

    kind = "radial"

    def __init__(self, offset=None, amplitude=0.0, frequency=0, *, r_expr=None):
        if r_expr is None:
            if offset is None:
                raise ValueError("radial curve needs an offset or an r(t) expression")
            self.offset = float(offset)
            self.amplitude = float(amplitude)
            self.frequency = float(frequency)
            self.r_expr = (sp.nsimplify(self.offset) + sp.nsimplify(self.amplitude)
                           * sp.sin(sp.nsimplify(self.frequency) * T))
            self._rfuncs = None
        else:
            if isinstance(r_expr, str):
                r_expr = parse_expression(r_expr, variables=("t",))
            self.offset = None
            self.r_expr = sp.sympify(r_expr)
            self._rfuncs = [sp.lambdify(T, sp.diff(self.r_expr, T, k), "numpy") for k in range(4)]

    def __repr__(self):
        return f"RadialCurve(r={self.r_expr})"

    def radius(self, t, k: int = 0):
        t = np.asarray(t, dtype=float)
        if self._rfuncs is None:
            w = self.frequency
            val = self.amplitude * w ** k * np.sin(w * t + k * math.pi / 2)
            return (self.offset + val) if k == 0 else val
        return np.broadcast_to(self._rfuncs[k](t), t.shape) * 1.0

    def _derivs(self, t, order):
        rs = [self.radius(t, k) for k in range(order + 1)]
        out = []
        for m in range(order + 1):
            p = 0.0
            q = 0.0
            for k in range(m + 1):
                c = math.comb(m, k)
                shift = (m - k) * math.pi / 2
                p = p + c * rs[k] * np.cos(t + shift)
                q = q + c * rs[k] * np.sin(t + shift)
            out.append((p, q))
        return out

    def max_radius(self):
        if self._rfuncs is None:
            return self.offset + abs(self.amplitude)
        ts = np.linspace(0.0, TWO_PI, 65536)
        return float(np.max(np.abs(self.radius(ts)))) * 1.001


def radial_leaf(offset: float, amplitude: float, frequency: int) -> RadialCurve:
    return RadialCurve(offset, amplitude, frequency)


class ExpressionCurve(ParametricCurve):
    """Generic curve given by expressions ``x(t)``, ``y(t)``."""

    kind = "generic"

    def __init__(self, x_expr, y_expr, period: float = TWO_PI):
        if isinstance(x_expr, str):
            x_expr = parse_expression(x_expr, variables=("t",))
        if isinstance(y_expr, str):
            y_expr = parse_expression(y_expr, variables=("t",))
        self.x_expr = sp.sympify(x_expr)
        self.y_expr = sp.sympify(y_expr)
        self.period = float(period)
        self._funcs = [
            (sp.lambdify(T, sp.diff(self.x_expr, T, m), "numpy"),
             sp.lambdify(T, sp.diff(self.y_expr, T, m), "numpy"))
            for m in range(4)
        ]

    def __repr__(self):
        return f"ExpressionCurve({self.x_expr}, {self.y_expr})"

    def _derivs(self, t, order):
        out = []
        for m in range(order + 1):
            fx, fy = self._funcs[m]
            out.append((np.broadcast_to(fx(t), t.shape) * 1.0,
                        np.broadcast_to(fy(t), t.shape) * 1.0))
        return out


# --------------------------------------------------------------------------
# nearest-point machinery
# --------------------------------------------------------------------------

class _SampleIndex:
    """Uniform samples of one curve in a KD-tree, used to bracket minima."""

    def __init__(self, curve: ParametricCurve, n_samples: int):
        self.curve = curve
        self.n = n_samples
        self.t = np.arange(n_samples) * (curve.period / n_samples)
        p, q = curve.eval(self.t)
        self.points = np.column_stack([p, q])
        seg = np.diff(np.vstack([self.points, self.points[:1]]), axis=0)
        self.spacing = float(np.max(np.hypot(seg[:, 0], seg[:, 1])))
        self.tree = cKDTree(self.points)
        # signed area > 0 means counter-clockwise
        x, y = self.points[:, 0], self.points[:, 1]
        self.orientation = 1.0 if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) > 0 else -1.0


def _stationarity(curve, t, x, y):
    (p, q), (p1, q1), (p2, q2) = curve.derivs(t, 2)
    dx = p - x
    dy = q - y
    phi = dx * p1 + dy * q1
    dphi = p1 * p1 + q1 * q1 + dx * p2 + dy * q2
    return phi, dphi


def _refine(curve, t0, x, y, half_width, max_iter=200, tol=1e-14):
    """Safeguarded Newton on d/dt |c(t) - pt|^2 / 2 inside t0 +- half_width.

    Returns (t, ok) where ok is False when the bracket shows no sign change.
    """
    lo = t0 - half_width
    hi = t0 + half_width
    flo, _ = _stationarity(curve, lo, x, y)
    fhi, _ = _stationarity(curve, hi, x, y)
    ok = (flo <= 0) & (fhi >= 0)
    t = t0.copy()
    active = ok.copy()
    for _ in range(max_iter):
        if not active.any():
            break
        f, df = _stationarity(curve, t, x, y)
        exact = f == 0
        neg = f < 0
        lo = np.where(active & neg, t, lo)
        hi = np.where(active & ~neg & ~exact, t, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - f / df
        bad = ~np.isfinite(t_new) | (t_new <= lo) | (t_new >= hi) | (df <= 0)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        t_new = np.where(exact, t, t_new)
        step = np.abs(t_new - t)
        t = np.where(active, t_new, t)
        done = exact | (step <= tol) | ((hi - lo) <= tol)
        active &= ~done
    ok &= ~active
    # the loop may stop right after a bisection step; polish with plain Newton
    for _ in range(2):
        f, df = _stationarity(curve, t, x, y)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - f / df
        t_new = np.where(np.isfinite(t_new) & (np.abs(t_new - t0) <= half_width), t_new, t)
        f_new, _ = _stationarity(curve, t_new, x, y)
        t = np.where(ok & (np.abs(f_new) < np.abs(f)), t_new, t)
    return t, ok


def _project_on_curve(index: _SampleIndex, pts: np.ndarray, k: int = 24):
    """Nearest point on one curve for each row of ``pts``.

    Returns ``t, dist, ok`` arrays.
    """
    curve = index.curve
    n = index.n
    npts = len(pts)
    k = min(k, n)
    d0, _ = index.tree.query(pts, k=1)
    bound = d0 + index.spacing
    dists, idx = index.tree.query(pts, k=k, distance_upper_bound=float(bound.max()) * (1 + 1e-12))
    if k == 1:
        dists = dists[:, None]
        idx = idx[:, None]
    valid = (idx < n) & (dists <= bound[:, None])
    # rows whose ball held more than k samples get the full ball instead
    overflow = valid[:, -1]
    idx = np.where(valid, idx, 0)
    # keep discrete local minima of the sampled distance
    prev_i = (idx - 1) % n
    next_i = (idx + 1) % n
    dprev = np.hypot(*(index.points[prev_i] - pts[:, None, :]).transpose(2, 0, 1))
    dnext = np.hypot(*(index.points[next_i] - pts[:, None, :]).transpose(2, 0, 1))
    is_min = valid & (dists <= dprev) & (dists <= dnext)

    rows, cols = np.nonzero(is_min & ~overflow[:, None])
    cand_rows = [rows]
    cand_idx = [idx[rows, cols]]
    # rows whose ball overflowed: scan every sample, in chunks
    over = np.nonzero(overflow)[0]
    for start in range(0, len(over), 256):
        chunk = over[start:start + 256]
        dall = np.hypot(index.points[None, :, 0] - pts[chunk, None, 0],
                        index.points[None, :, 1] - pts[chunk, None, 1])
        local = ((dall <= np.roll(dall, 1, axis=1)) & (dall <= np.roll(dall, -1, axis=1))
                 & (dall <= bound[chunk, None]))
        r, c = np.nonzero(local)
        cand_rows.append(chunk[r])
        cand_idx.append(c)
    rows = np.concatenate(cand_rows)
    cidx = np.concatenate(cand_idx)

    best_t = np.full(npts, np.nan)
    best_d = np.full(npts, np.inf)
    if len(rows):
        x = pts[rows, 0]
        y = pts[rows, 1]
        t, ok = _refine(curve, index.t[cidx], x, y, curve.period / n)
        p, q = curve.eval(t)
        d = np.where(ok, np.hypot(p - x, q - y), np.inf)
        _select_best(rows, _wrap(t, curve.period), d, best_t, best_d)
    return best_t, best_d, np.isfinite(best_d)


def _wrap(t, period):
    t = np.mod(t, period)
    return np.where(t >= period, t - period, t)


def _select_best(rows, t, d, best_t, best_d):
    # smallest distance wins; exact ties go to the smaller parameter
    order = np.lexsort((t, d, rows))
    uniq, first = np.unique(rows[order], return_index=True)
    sel = order[first]
    better = (d[sel] < best_d[uniq]) | ((d[sel] == best_d[uniq]) & (t[sel] < best_t[uniq]))
    best_d[uniq[better]] = d[sel[better]]
    best_t[uniq[better]] = t[sel[better]]


# --------------------------------------------------------------------------
# domains
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Projection:
    """Foot point of the orthogonal projection of a point onto the boundary."""

    t_star: float
    foot: tuple
    distance: float
    curve_index: int
    slope_ratio: float
    nudged: bool = False


@dataclass
class ProjectionBatch:
    """Array form of many projections (one entry per query point)."""

    t: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    distance: np.ndarray
    curve: np.ndarray

    def __len__(self):
        return len(self.t)

    def item(self, i, domain) -> Projection:
        c = domain.curves[int(self.curve[i])]
        (_, _), (p1, q1) = c.derivs(self.t[i], 1)
        return Projection(float(self.t[i]), (float(self.fx[i]), float(self.fy[i])),
                          float(self.distance[i]), int(self.curve[i]), _ratio(p1, q1))


def _ratio(p1, q1):
    p1 = float(p1)
    q1 = float(q1)
    if p1 == 0.0:
        return math.copysign(math.inf, q1) if q1 != 0 else math.nan
    return q1 / p1


@dataclass
class Domain:
    """A single enclosure, or an annulus between an outer and inner curve.

    ``curves[0]`` is always the outer curve; ``curves[1]`` (annulus only) the inner.
    """

    curves: list
    composition: str = "single"
    boundary_tolerance: float = 1e-12
    n_samples: int = 4096
    _indices: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.composition not in ("single", "annulus"):
            raise ValueError(f"unknown composition {self.composition!r}")
        expected = 1 if self.composition == "single" else 2
        if len(self.curves) != expected:
            raise ValueError(f"{self.composition} domain needs {expected} curve(s)")

    @classmethod
    def single(cls, curve, **kw):
        return cls([curve], "single", **kw)

    @classmethod
    def annulus(cls, outer, inner, **kw):
        dom = cls([outer, inner], "annulus", **kw)
        dom.validate()
        return dom

    # -- sampling ----------------------------------------------------------
    def sample_index(self, ci: int, level: int = 0) -> _SampleIndex:
        key = (ci, level)
        if key not in self._indices:
            curve = self.curves[ci]
            n = self.n_samples
            # keep samples dense relative to the curve length
            while True:
                idx = _SampleIndex(curve, n * 2 ** level)
                if idx.spacing <= 2e-3 or n >= 2 ** 20:
                    break
                n *= 2
            self._indices[key] = idx
        return self._indices[key]

    def bounding_box(self):
        lo = np.array([np.inf, np.inf])
        hi = -lo
        for ci, c in enumerate(self.curves):
            if c.kind == "radial":
                r = c.max_radius()
                lo = np.minimum(lo, [-r, -r])
                hi = np.maximum(hi, [r, r])
            else:
                idx = self.sample_index(ci)
                lo = np.minimum(lo, idx.points.min(axis=0) - idx.spacing)
                hi = np.maximum(hi, idx.points.max(axis=0) + idx.spacing)
        return lo, hi

    def validate(self):
        if self.composition == "annulus":
            inner = self.sample_index(1).points
            inside_outer = self._inside_curve(0, inner)
            d = self.distance(inner, curves=[0])
            if not np.all(inside_outer) or np.any(d <= self.boundary_tolerance):
                raise ValueError("inner curve must lie strictly inside the outer curve")
        return self

    # -- membership --------------------------------------------------------
    def _inside_curve(self, ci, pts):
        curve = self.curves[ci]
        pts = np.atleast_2d(pts)
        if curve.kind == "radial":
            rho = np.hypot(pts[:, 0], pts[:, 1])
            theta = np.arctan2(pts[:, 1], pts[:, 0])
            return rho < curve.radius(np.mod(theta, TWO_PI))
        return self._winding_inside(ci, pts)

    def _winding_inside(self, ci, pts):
        idx = self.sample_index(ci)
        inside = np.zeros(len(pts), dtype=bool)
        samples = idx.points
        d_s, _ = idx.tree.query(pts, k=1)
        near = d_s < 4 * idx.spacing
        far = np.nonzero(~near)[0]
        for start in range(0, len(far), 512):
            rows = far[start:start + 512]
            ang = np.arctan2(samples[None, :, 1] - pts[rows, None, 1],
                             samples[None, :, 0] - pts[rows, None, 0])
            dang = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
            dang = (dang + math.pi) % TWO_PI - math.pi
            winding = np.rint(dang.sum(axis=1) / TWO_PI)
            inside[rows] = winding != 0
        near_rows = np.nonzero(near)[0]
        if len(near_rows):
            t, _, _ = _project_on_curve(idx, pts[near_rows])
            (p, q), (p1, q1) = self.curves[ci].derivs(t, 1)
            cross = p1 * (pts[near_rows, 1] - q) - q1 * (pts[near_rows, 0] - p)
            inside[near_rows] = cross * idx.orientation > 0
        return inside

    def distance(self, pts, curves=None):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        best = np.full(len(pts), np.inf)
        for ci in (range(len(self.curves)) if curves is None else curves):
            _, d, _ = _project_on_curve(self.sample_index(ci), pts)
            best = np.minimum(best, d)
        return best

    def classify_many(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        inside = self._inside_curve(0, pts)
        if self.composition == "annulus":
            inside &= ~self._inside_curve(1, pts)
        out = np.where(inside, PointClass.INSIDE, PointClass.OUTSIDE).astype(np.int8)
        # exact distance only where a sample lies close enough for it to matter
        eps = self.boundary_tolerance
        for ci in range(len(self.curves)):
            idx = self.sample_index(ci)
            d_s, _ = idx.tree.query(pts, k=1)
            cand = np.nonzero(d_s <= idx.spacing + eps)[0]
            if len(cand):
                _, d, _ = _project_on_curve(idx, pts[cand])
                out[cand[d <= eps]] = PointClass.ON_BOUNDARY
        return out

    def classify(self, pt) -> PointClass:
        return PointClass(int(self.classify_many(np.asarray(pt, dtype=float)[None, :])[0]))

    # -- projection --------------------------------------------------------
    def project_many(self, pts, max_doublings: int = 4) -> ProjectionBatch:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = len(pts)
        best_t = np.full(n, np.nan)
        best_d = np.full(n, np.inf)
        best_c = np.full(n, -1, dtype=int)
        for ci in range(len(self.curves)):
            todo = np.arange(n)
            t = np.full(n, np.nan)
            d = np.full(n, np.inf)
            for level in range(max_doublings + 1):
                tt, dd, ok = _project_on_curve(self.sample_index(ci, level), pts[todo])
                t[todo[ok]] = tt[ok]
                d[todo[ok]] = dd[ok]
                todo = todo[~ok]
                if not len(todo):
                    break
            if len(todo):
                raise NewtonDivergence(
                    f"projection failed on curve {ci} for {len(todo)} point(s), "
                    f"e.g. {tuple(pts[todo[0]])}")
            # strict comparison keeps the lower curve index on ties
            better = d < best_d
            best_t = np.where(better, t, best_t)
            best_d = np.where(better, d, best_d)
            best_c = np.where(better, ci, best_c)
        fx = np.empty(n)
        fy = np.empty(n)
        for ci in range(len(self.curves)):
            m = best_c == ci
            if m.any():
                fx[m], fy[m] = self.curves[ci].eval(best_t[m])
        return ProjectionBatch(best_t, fx, fy, best_d, best_c)

    def project(self, pt) -> Projection:
        batch = self.project_many(np.asarray(pt, dtype=float)[None, :])
        return batch.item(0, self)


def classify_point(domain: Domain, pt) -> PointClass:
    return domain.classify(pt)


def project(domain: Domain, pt) -> Projection:
    return domain.project(pt)


# --------------------------------------------------------------------------
# degeneracy escape
# --------------------------------------------------------------------------

def is_degenerate(p1, q1, eps_slope: float, ratios=DEGENERATE_RATIOS):
    """True where the tangent ratio q1/p1 is within ``eps_slope`` of a bad value."""
    p1 = np.asarray(p1, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    norm = np.hypot(p1, q1)
    bad = np.zeros(np.broadcast(p1, q1).shape, dtype=bool)
    for c in ratios:
        bad |= np.abs(q1 - c * p1) < eps_slope * norm
    return bad


def nudge_projection(proj: Projection, domain: Domain, h: float,
                     eps_slope: float = 1e-6, max_retries: int = 20) -> Projection:
    """Move the anchor along the curve when its tangent hits a degenerate ratio.

    The shift starts at ``h/10`` in arclength and doubles per retry, trying
    both directions each time.
    """
    curve = domain.curves[proj.curve_index]
    (_, _), (p1, q1) = curve.derivs(proj.t_star, 1)
    if not is_degenerate(p1, q1, eps_slope):
        return proj
    speed = math.hypot(float(p1), float(q1))
    dt = (h / 10.0) / speed
    for _ in range(max_retries):
        for sign in (1.0, -1.0):
            t = math.fmod(proj.t_star + sign * dt, curve.period)
            if t < 0:
                t += curve.period
            (p, q), (a1, b1) = curve.derivs(t, 1)
            if not is_degenerate(a1, b1, eps_slope):
                foot = (float(p), float(q))
                return replace(proj, t_star=t, foot=foot, slope_ratio=_ratio(a1, b1),
                               nudged=True)
        dt *= 2.0
    raise NudgeFailed(f"could not escape degenerate tangent near t={proj.t_star}")
