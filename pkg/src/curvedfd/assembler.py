"""Global sparse system: one row per node of the closed discrete domain.

Regular centers carry ``(1/h^2) sum C u = F``, irregular centers
``sum C u = F`` over their support set, and on-boundary nodes the identity
``u = g``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np
import scipy.io
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .exceptions import DimensionMismatch, SolveFailed
from .grid import OFFSETS, Grid, NodeClass
from .stencil_irregular import StencilBatch, anchor_data, build_stencils
from .stencil_regular import regular_stencil

log = logging.getLogger(__name__)

ITERATIVE_THRESHOLD = 4_000_000
RESIDUAL_TOL = 1e-10


class RowKind(IntEnum):
    REGULAR = 0
    IRREGULAR = 1
    BOUNDARY = 2
    FALLBACK = 3  # irregular center without a valid compact stencil, u = g(foot)


@dataclass
class SparseSystem:
    A: sps.csr_matrix
    rhs: np.ndarray
    kinds: np.ndarray
    i: np.ndarray  # grid index of each unknown
    j: np.ndarray
    grid: Grid
    irregular: StencilBatch | None = None
    irregular_rows: np.ndarray | None = None

    @property
    def n(self):
        return self.A.shape[0]

    def counts(self):
        return {k.name: int(np.count_nonzero(self.kinds == k)) for k in RowKind}

    def write_matrix_market(self, path):
        scipy.io.mmwrite(str(path), self.A, comment="assembled system matrix")
        np.savetxt(str(path) + ".rhs", self.rhs)


@dataclass
class SolutionField:
    values: np.ndarray
    i: np.ndarray
    j: np.ndarray
    h: float
    stats: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.i * self.h

    @property
    def y(self):
        return self.j * self.h


def _boundary_values(problem, x, y):
    """Dirichlet value at on-boundary nodes."""
    bd = problem.boundary
    if bd.field is not None:
        return np.asarray(bd.field(x, y), dtype=float) * np.ones_like(x)
    proj = problem.domain.project_many(np.column_stack([x, y]))
    out = np.empty(len(x))
    for ci in range(len(problem.domain.curves)):
        m = proj.curve == ci
        if m.any():
            out[m] = bd.values(ci, proj.t[m])[0]
    return out


def assemble(grid: Grid, problem, *, fallback: bool = False, eps_slope: float = 1e-6) -> SparseSystem:
    """Build the sparse system for ``problem`` on ``grid``.

    With ``fallback`` an irregular center whose compact stencil cannot be
    built (support set too small at coarse ``h``) gets the low-order row
    ``u = g(foot)`` instead of raising.
    """
    spec = grid.spec
    h = grid.h
    number = np.full(spec.shape, -1, dtype=np.int64)
    ii, jj = grid.unknown_nodes()
    n = len(ii)
    number[ii - spec.i_min, jj - spec.j_min] = np.arange(n)
    cls = grid.classes[ii - spec.i_min, jj - spec.j_min]
    kinds = np.empty(n, dtype=np.int8)
    rhs = np.zeros(n)
    rows, cols, vals = [], [], []

    # regular centers
    reg = np.nonzero(cls == NodeClass.REGULAR)[0]
    if len(reg):
        x, y = spec.coords(ii[reg], jj[reg])
        st = regular_stencil(problem.transformed.partials(x, y, order=2), h)
        for r, l in OFFSETS:
            nb = number[ii[reg] + r - spec.i_min, jj[reg] + l - spec.j_min]
            rows.append(reg)
            cols.append(nb)
            vals.append(st.C[:, r + 1, l + 1] / (h * h))
        rhs[reg] = st.F
        kinds[reg] = RowKind.REGULAR

    # on-boundary nodes
    bnd = np.nonzero(cls == NodeClass.ON_BOUNDARY)[0]
    if len(bnd):
        x, y = spec.coords(ii[bnd], jj[bnd])
        rows.append(bnd)
        cols.append(bnd)
        vals.append(np.ones(len(bnd)))
        rhs[bnd] = _boundary_values(problem, x, y)
        kinds[bnd] = RowKind.BOUNDARY

    # irregular centers
    irr_rows = None
    batch = None
    if np.any(cls == NodeClass.IRREGULAR):
        irr = grid.irregular(eps_slope, strict=not fallback)
        irr_rows = number[irr.i - spec.i_min, irr.j - spec.j_min]
        anchor = anchor_data(problem, irr.curve, irr.t, irr.fx, irr.fy)
        batch = build_stencils(anchor, irr.w, irr.v, irr.member, h, check=not fallback,
                               index=np.column_stack([irr.i, irr.j]),
                               points=np.column_stack([irr.i * h, irr.j * h]))
        good = batch.ok() if fallback else np.ones(len(batch), dtype=bool)
        for k, (r, l) in enumerate(OFFSETS):
            use = good & batch.member[:, k]
            rows.append(irr_rows[use])
            cols.append(number[irr.i[use] + r - spec.i_min, irr.j[use] + l - spec.j_min])
            vals.append(batch.C[use, k])
        rhs[irr_rows[good]] = batch.F[good]
        kinds[irr_rows[good]] = RowKind.IRREGULAR
        bad = ~good
        if bad.any():
            log.warning("%d irregular center(s) use the low-order fallback row", int(bad.sum()))
            rows.append(irr_rows[bad])
            cols.append(irr_rows[bad])
            vals.append(np.ones(int(bad.sum())))
            rhs[irr_rows[bad]] = anchor.g[0][bad]
            kinds[irr_rows[bad]] = RowKind.FALLBACK

    A = sps.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n))
    return SparseSystem(A, rhs, kinds, ii, jj, grid, batch, irr_rows)


def apply_operator(system: SparseSystem, values) -> np.ndarray:
    """``A u - rhs``."""
    values = np.asarray(values, dtype=float)
    if values.shape != (system.n,):
        raise DimensionMismatch(f"expected {system.n} values, got shape {values.shape}")
    return system.A @ values - system.rhs


def _relative_residual(A, u, b):
    bn = np.abs(b).max()
    return float(np.abs(A @ u - b).max() / (bn if bn > 0 else 1.0))


def solve(system: SparseSystem, *, method: str = "auto", equilibrate: bool = True,
          iterative_threshold: int = ITERATIVE_THRESHOLD, tol: float = RESIDUAL_TOL,
          rtol: float = 1e-12, maxiter: int = 10_000) -> SolutionField:
    """Solve the assembled system directly (sparse LU) or with ILU-preconditioned BiCGSTAB."""
    A, b = system.A, system.rhs
    if equilibrate:
        scale = 1.0 / abs(A).max(axis=1).toarray().ravel()
        A = sps.diags(scale) @ A
        b = b * scale
    A = A.tocsc()
    if method == "auto":
        method = "direct" if system.n <= iterative_threshold else "iterative"
    t0 = time.perf_counter()
    stats = {"method": method, "unknowns": system.n}
    if method == "direct":
        lu = spla.splu(A)
        u = lu.solve(b)
        # a couple of refinement sweeps polish the residual when pivots were small
        for _ in range(2):
            if _relative_residual(A, u, b) <= tol:
                break
            u = u + lu.solve(b - A @ u)
        stats["fill"] = int(lu.L.nnz + lu.U.nnz)
    elif method == "iterative":
        ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=20)
        M = spla.LinearOperator(A.shape, ilu.solve)
        count = [0]

        def tick(_):
            count[0] += 1

        u, info = spla.bicgstab(A, b, M=M, rtol=rtol, atol=0.0, maxiter=maxiter, callback=tick)
        stats["iterations"] = count[0]
        if info != 0:
            raise SolveFailed(f"BiCGSTAB did not converge (info={info})",
                              residual=_relative_residual(A, u, b))
    else:
        raise ValueError(f"unknown solver method {method!r}")
    res = _relative_residual(A, u, b)
    stats["residual"] = res
    stats["seconds"] = time.perf_counter() - t0
    if not np.all(np.isfinite(u)) or not res <= tol:
        raise SolveFailed(f"relative residual {res:.3e} exceeds {tol:g}", residual=res)
    return SolutionField(u, system.i, system.j, system.grid.h, stats)
