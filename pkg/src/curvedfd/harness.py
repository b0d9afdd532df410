"""Convergence studies: solve on a sequence of grids and report error norms and orders."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembler import RowKind, SolutionField, assemble, solve
from .catalog import get_problem
from .exceptions import CurvedFDError, ZeroNormExact
from .grid import build_grid
from .problem import ProblemSpec
from .stencil_irregular import write_diagnostics

log = logging.getLogger(__name__)

CSV_COLUMNS = ["N", "h", "unknowns", "rel_l2", "order_l2", "linf", "order_linf", "seconds"]


@dataclass
class RunConfig:
    problem: str | ProblemSpec
    Ns: list
    solver: str = "auto"
    out: str | None = None
    csv: bool = False
    table: bool = True
    plot: bool = False
    dump_stencils: bool = False
    dump_grid: bool = False
    matrix_market: bool = False
    fallback: bool = True
    equilibrate: bool = True
    eps_slope: float = 1e-6

    def __post_init__(self):
        self.Ns = [int(n) for n in self.Ns]
        if not self.Ns:
            raise ValueError("at least one grid size is required")
        if any(b <= a for a, b in zip(self.Ns, self.Ns[1:])):
            raise ValueError(f"grid sizes must be strictly increasing, got {self.Ns}")
        if self.solver not in ("auto", "direct", "iterative"):
            raise ValueError(f"unknown solver {self.solver!r}")

    def resolve_problem(self) -> ProblemSpec:
        if isinstance(self.problem, ProblemSpec):
            return self.problem
        return get_problem(self.problem)


@dataclass
class RunRecord:
    N: int
    h: float
    unknowns: int | None = None
    rel_l2: float | None = None
    linf: float | None = None
    seconds: float | None = None
    order_l2: float | None = None
    order_linf: float | None = None
    fallback_rows: int = 0
    error: str | None = None

    @property
    def solved(self):
        return self.error is None


@dataclass
class ConvergenceReport:
    problem: str
    records: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.solved for r in self.records)

    def table(self) -> str:
        head = f"{'h':>8}  {'unknowns':>9}  {'rel_l2':>11}  {'order':>6}  {'linf':>11}  {'order':>6}  {'seconds':>8}"
        lines = [f"problem: {self.problem}", head, "-" * len(head)]
        for r in self.records:
            hs = f"1/{r.N}"
            if not r.solved:
                lines.append(f"{hs:>8}  failed: {r.error}")
                continue
            lines.append(f"{hs:>8}  {r.unknowns:>9d}  {r.rel_l2:>11.4E}  {_fmt_order(r.order_l2):>6}"
                         f"  {r.linf:>11.4E}  {_fmt_order(r.order_linf):>6}  {r.seconds:>8.2f}")
        return "\n".join(lines)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(CSV_COLUMNS)
            for r in self.records:
                out.writerow([r.N, repr(r.h)] + [_cell(getattr(r, c)) for c in CSV_COLUMNS[2:]])

    @classmethod
    def from_csv(cls, path, problem: str = "") -> ConvergenceReport:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        recs = []
        for row in rows:
            vals = {c: (None if row[c] == "" else float(row[c])) for c in CSV_COLUMNS[1:]}
            unknowns = None if vals["unknowns"] is None else int(vals["unknowns"])
            recs.append(RunRecord(int(row["N"]), vals["h"], unknowns, vals["rel_l2"],
                                  vals["linf"], vals["seconds"], vals["order_l2"],
                                  vals["order_linf"]))
        return cls(problem, recs)


def _cell(v):
    return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)


def _fmt_order(v):
    return "" if v is None else f"{v:.2f}"


def error_norms(solution: SolutionField, exact) -> tuple:
    """Relative discrete l2 error and max error over all unknown nodes."""
    ue = np.asarray(exact(solution.x, solution.y), dtype=float) * np.ones(len(solution.values))
    denom = float(np.sum(ue * ue))
    if denom == 0.0:
        raise ZeroNormExact("exact solution vanishes on the grid")
    err = solution.values - ue
    return math.sqrt(float(np.sum(err * err)) / denom), float(np.abs(err).max())


def report_orders(errors) -> list:
    """``log2(e_N / e_2N)`` between consecutive entries; ``None`` for the first or missing ones."""
    out = [None]
    for a, b in zip(errors, errors[1:]):
        if a is None or b is None or a <= 0 or b <= 0:
            out.append(None)
        else:
            out.append(math.log2(a / b))
    return out[:len(errors)]


def solve_problem(problem: ProblemSpec, N: int, cfg: RunConfig, out: Path | None = None):
    """Grid, assemble and solve at one resolution; returns ``(solution, system)``.

    The exact solution is never consulted here.
    """
    grid = build_grid(problem.domain, N)
    system = assemble(grid, problem, fallback=cfg.fallback, eps_slope=cfg.eps_slope)
    if out is not None:
        if cfg.dump_grid:
            grid.write_csv(out / f"grid_N{N}.csv")
        if cfg.dump_stencils and system.irregular is not None:
            write_diagnostics(out / f"stencils_N{N}.csv",
                              grid.irregular(cfg.eps_slope, strict=not cfg.fallback),
                              system.irregular)
        if cfg.matrix_market:
            system.write_matrix_market(out / f"system_N{N}.mtx")
    return solve(system, method=cfg.solver, equilibrate=cfg.equilibrate), system


def run_convergence(cfg: RunConfig) -> ConvergenceReport:
    problem = cfg.resolve_problem()
    out = Path(cfg.out) if cfg.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    report = ConvergenceReport(problem.name)
    for N in cfg.Ns:
        rec = RunRecord(N, 1.0 / N)
        t0 = time.perf_counter()
        try:
            sol, system = solve_problem(problem, N, cfg, out)
            rec.seconds = time.perf_counter() - t0
            rec.unknowns = system.n
            rec.fallback_rows = system.counts()[RowKind.FALLBACK.name]
            if problem.exact is not None:
                rec.rel_l2, rec.linf = error_norms(sol, problem.exact)
                if cfg.plot and out is not None:
                    write_error_plot(sol, problem.exact, out / f"error_N{N}.svg",
                                     title=f"{problem.name}, h = 1/{N}")
        except (CurvedFDError, MemoryError) as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
            log.error("N = %d failed: %s", N, rec.error)
        report.records.append(rec)
    for key in ("l2", "linf"):
        src = "rel_l2" if key == "l2" else "linf"
        for rec, o in zip(report.records,
                          report_orders([getattr(r, src) for r in report.records])):
            setattr(rec, f"order_{key}", o)
    if out is not None and cfg.csv:
        report.to_csv(out / f"{problem.name}_convergence.csv")
    return report


def write_error_plot(solution: SolutionField, exact, path, title: str = ""):
    """Scatter of ``|u_h - u|`` over the grid nodes as an SVG (viridis, log scale)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import LogNorm

    err = np.abs(solution.values - exact(solution.x, solution.y))
    floor = max(err.max() * 1e-6, np.finfo(float).tiny)
    fig, ax = plt.subplots(figsize=(6, 5))
    marker = max(0.05, 4000.0 / len(err))
    sc = ax.scatter(solution.x, solution.y, c=np.maximum(err, floor), s=marker,
                    cmap="viridis", norm=LogNorm(vmin=floor, vmax=max(err.max(), 2 * floor)),
                    linewidths=0)
    fig.colorbar(sc, ax=ax, label="|u_h - u|")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
