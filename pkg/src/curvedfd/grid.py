"""Uniform Cartesian grid over a curved domain: node classes and support sets.

Nodes sit at ``(i h, j h)`` with ``h = 1/N``.  A node inside the domain is a
*regular* center when all nine nodes of its 3x3 block lie in the closed
domain, otherwise an *irregular* center.  Nodes within the boundary
tolerance of a curve are *on-boundary* and carry the Dirichlet value.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .exceptions import MeshTooCoarse
from .geometry import Domain, PointClass, Projection, is_degenerate, nudge_projection

OFFSETS = [(r, l) for r in (-1, 0, 1) for l in (-1, 0, 1)]
CENTER = OFFSETS.index((0, 0))
# an irregular center needs at least this many support nodes for a fourth-order row
MIN_SUPPORT = 4


class NodeClass(IntEnum):
    EXTERIOR = 0
    ON_BOUNDARY = 1
    REGULAR = 2
    IRREGULAR = 3


@dataclass(frozen=True)
class GridSpec:
    """Index box ``[i_min, i_max] x [j_min, j_max]`` of the grid with ``h = 1/N``."""

    N: int
    i_min: int
    i_max: int
    j_min: int
    j_max: int

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def shape(self):
        return (self.i_max - self.i_min + 1, self.j_max - self.j_min + 1)

    def coords(self, i, j):
        return np.asarray(i) * self.h, np.asarray(j) * self.h

    @classmethod
    def covering(cls, domain: Domain, N: int) -> GridSpec:
        lo, hi = domain.bounding_box()
        # one extra cell on every side so neighbours never leave the box
        return cls(N, math.floor(lo[0] * N) - 1, math.ceil(hi[0] * N) + 1,
                   math.floor(lo[1] * N) - 1, math.ceil(hi[1] * N) + 1)


@dataclass
class IrregularContext:
    """Everything the boundary stencil needs about one irregular center."""

    index: tuple
    projection: Projection
    w: float
    v: float
    S: frozenset


@dataclass
class IrregularSet:
    """Array form of all irregular contexts on a grid (one row per center)."""

    i: np.ndarray
    j: np.ndarray
    t: np.ndarray
    curve: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    distance: np.ndarray
    w: np.ndarray
    v: np.ndarray
    member: np.ndarray  # (M, 9) bool in OFFSETS order
    nudged: np.ndarray

    def __len__(self):
        return len(self.i)

    def context(self, k: int, domain: Domain) -> IrregularContext:
        (_, _), (p1, q1) = domain.curves[int(self.curve[k])].derivs(self.t[k], 1)
        proj = Projection(float(self.t[k]), (float(self.fx[k]), float(self.fy[k])),
                          float(self.distance[k]), int(self.curve[k]),
                          float(q1 / p1) if p1 != 0 else math.copysign(math.inf, q1),
                          bool(self.nudged[k]))
        S = frozenset(o for o, m in zip(OFFSETS, self.member[k]) if m)
        return IrregularContext((int(self.i[k]), int(self.j[k])), proj,
                                float(self.w[k]), float(self.v[k]), S)

    def subset(self, rows) -> IrregularSet:
        return IrregularSet(*(getattr(self, f)[rows] for f in self.__dataclass_fields__))


@dataclass
class Grid:
    spec: GridSpec
    domain: Domain
    classes: np.ndarray  # NodeClass per node, indexed [i - i_min, j - j_min]
    _irregular: dict = field(default_factory=dict, repr=False)

    @property
    def h(self):
        return self.spec.h

    @property
    def N(self):
        return self.spec.N

    def node_class(self, i: int, j: int) -> NodeClass:
        return NodeClass(int(self.classes[i - self.spec.i_min, j - self.spec.j_min]))

    def nodes_of(self, cls: NodeClass):
        """``(i, j)`` index arrays of all nodes of the given class (row-major order)."""
        ii, jj = np.nonzero(self.classes == cls)
        return ii + self.spec.i_min, jj + self.spec.j_min

    def counts(self) -> dict:
        return {c.name: int(np.count_nonzero(self.classes == c)) for c in NodeClass}

    def in_closure(self):
        return self.classes != NodeClass.EXTERIOR

    def unknown_nodes(self):
        """Indices of all nodes that carry an unknown (closure of the domain)."""
        ii, jj = np.nonzero(self.in_closure())
        return ii + self.spec.i_min, jj + self.spec.j_min

    def irregular(self, eps_slope: float = 1e-6, strict: bool = True) -> IrregularSet:
        key = (eps_slope, strict)
        if key not in self._irregular:
            self._irregular[key] = irregular_contexts(self, eps_slope, strict)
        return self._irregular[key]

    def write_csv(self, path):
        write_grid_csv(self, path)


def build_grid(domain: Domain, N: int, *, require_regular: bool = True) -> Grid:
    """Classify every node of the grid covering ``domain`` with ``h = 1/N``.

    ``require_regular=False`` allows inspecting meshes too coarse to solve on.
    """
    if N < 8:
        raise MeshTooCoarse(f"N = {N} is below the minimum of 8")
    spec = GridSpec.covering(domain, N)
    nx, ny = spec.shape
    ii, jj = np.meshgrid(np.arange(spec.i_min, spec.i_max + 1),
                         np.arange(spec.j_min, spec.j_max + 1), indexing="ij")
    pts = np.column_stack([ii.ravel() * spec.h, jj.ravel() * spec.h])
    pc = domain.classify_many(pts).reshape(nx, ny)
    closed = pc != PointClass.OUTSIDE
    inside = pc == PointClass.INSIDE

    # a center is regular when its whole 3x3 block lies in the closed domain
    block = np.ones_like(closed)
    block[0, :] = block[-1, :] = block[:, 0] = block[:, -1] = False
    for r, l in OFFSETS:
        block[1:-1, 1:-1] &= closed[1 + r:nx - 1 + r, 1 + l:ny - 1 + l]

    classes = np.full((nx, ny), NodeClass.EXTERIOR, dtype=np.int8)
    classes[pc == PointClass.ON_BOUNDARY] = NodeClass.ON_BOUNDARY
    classes[inside & block] = NodeClass.REGULAR
    classes[inside & ~block] = NodeClass.IRREGULAR
    grid = Grid(spec, domain, classes)
    if require_regular and not np.any(classes == NodeClass.REGULAR):
        raise MeshTooCoarse(f"no regular centers at N = {N}")
    return grid


def _membership(grid: Grid, i, j):
    """(M, 9) bool: which block nodes of the given centers lie in the closed domain."""
    closed = grid.in_closure()
    ii = np.asarray(i) - grid.spec.i_min
    jj = np.asarray(j) - grid.spec.j_min
    return np.stack([closed[ii + r, jj + l] for r, l in OFFSETS], axis=-1)


def irregular_contexts(grid: Grid, eps_slope: float = 1e-6, strict: bool = True) -> IrregularSet:
    """Project every irregular center, nudge degenerate anchors, and collect S, w, v.

    With ``strict`` a center whose support set has fewer than 4 nodes raises
    ``MeshTooCoarse``; otherwise such centers are returned and left for the
    caller to handle.
    """
    domain = grid.domain
    h = grid.h
    i, j = grid.nodes_of(NodeClass.IRREGULAR)
    x, y = grid.spec.coords(i, j)
    member = _membership(grid, i, j)
    small = member.sum(axis=1) < MIN_SUPPORT
    if strict and np.any(small):
        k = int(np.argmax(small))
        raise MeshTooCoarse(f"support set of center ({i[k]}, {j[k]}) has fewer than 4 nodes")

    proj = domain.project_many(np.column_stack([x, y]))
    t, fx, fy = proj.t.copy(), proj.fx.copy(), proj.fy.copy()
    nudged = np.zeros(len(i), dtype=bool)
    p1 = np.empty(len(i))
    q1 = np.empty(len(i))
    for ci, curve in enumerate(domain.curves):
        m = proj.curve == ci
        if m.any():
            _, (p1[m], q1[m]) = curve.derivs(t[m], 1)
    for k in np.nonzero(is_degenerate(p1, q1, eps_slope))[0]:
        moved = nudge_projection(proj.item(k, domain), domain, h, eps_slope=eps_slope)
        t[k] = moved.t_star
        fx[k], fy[k] = moved.foot
        nudged[k] = moved.nudged
    w = (x - fx) / h
    v = (y - fy) / h
    return IrregularSet(i, j, t, proj.curve, fx, fy, proj.distance, w, v, member, nudged)


def support_set(grid: Grid, i: int, j: int, eps_slope: float = 1e-6) -> IrregularContext:
    """Irregular context of a single center ``(i, j)``."""
    if grid.node_class(i, j) != NodeClass.IRREGULAR:
        raise ValueError(f"node ({i}, {j}) is not an irregular center")
    domain = grid.domain
    x, y = grid.spec.coords(i, j)
    proj = nudge_projection(domain.project((float(x), float(y))), domain, grid.h,
                            eps_slope=eps_slope)
    member = _membership(grid, np.array([i]), np.array([j]))[0]
    S = frozenset(o for o, m in zip(OFFSETS, member) if m)
    if len(S) < MIN_SUPPORT:
        raise MeshTooCoarse(f"support set of center ({i}, {j}) has fewer than 4 nodes")
    return IrregularContext((i, j), proj, float((x - proj.foot[0]) / grid.h),
                            float((y - proj.foot[1]) / grid.h), S)


def write_grid_csv(grid: Grid, path):
    """Dump every node with columns ``i, j, x, y, class``."""
    spec = grid.spec
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["i", "j", "x", "y", "class"])
        for a in range(spec.shape[0]):
            for b in range(spec.shape[1]):
                i, j = a + spec.i_min, b + spec.j_min
                out.writerow([i, j, repr(i * spec.h), repr(j * spec.h),
                              NodeClass(int(grid.classes[a, b])).name])
