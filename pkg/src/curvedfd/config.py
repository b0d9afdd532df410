"""INI-style run configuration.

Example::

    [run]
    problem = custom          ; or a catalog name such as example1
    n = 128, 256, 512
    solver = direct
    out = results
    csv = yes
    plot = no

    [problem]                 ; only for problem = custom
    u = sin(6*x)*cos(6*y)
    alpha = exp(x+y)
    beta1 = exp(x-y)
    beta2 = cos(x)*cos(y)
    kappa = exp(x+y)

    [curve.outer]
    type = radial_leaf
    offset = 0.3
    amplitude = 0.2
    frequency = 20

    [curve.inner]             ; optional, makes the domain an annulus
    type = expression
    x = 0.1*cos(t)
    y = 0.1*sin(t)

Expression strings use ``+ - * / ^``, ``sin``, ``cos``, ``exp`` and ``pi``
in ``x, y`` (fields) or ``t`` (curves).
"""

from __future__ import annotations

import configparser

from .fields import parse_expression
from .geometry import Domain, ExpressionCurve, radial_leaf
from .harness import RunConfig
from .problem import make_manufactured

_RUN_KEYS = {"problem", "n", "solver", "out", "csv", "table", "plot", "dump_stencils",
             "dump_grid", "matrix_market", "fallback", "equilibrate", "eps_slope"}


def parse_sizes(text: str) -> list:
    return [int(s) for s in text.replace(";", ",").split(",") if s.strip()]


def curve_from_section(sec) -> object:
    kind = sec.get("type", "radial_leaf").strip()
    if kind == "radial_leaf":
        return radial_leaf(sec.getfloat("offset"), sec.getfloat("amplitude"),
                           sec.getint("frequency"))
    if kind == "expression":
        period = sec.get("period", "2*pi")
        return ExpressionCurve(sec["x"], sec["y"], period=_period(period))
    raise ValueError(f"unknown curve type {kind!r}")


def _period(text):
    return float(parse_expression(text, variables=()))


def problem_from_config(cp: configparser.ConfigParser):
    if "problem" not in cp or "curve.outer" not in cp:
        raise ValueError("custom problems need [problem] and [curve.outer] sections")
    p = cp["problem"]
    outer = curve_from_section(cp["curve.outer"])
    if "curve.inner" in cp:
        domain = Domain.annulus(outer, curve_from_section(cp["curve.inner"]))
    else:
        domain = Domain.single(outer)
    return make_manufactured(p["u"], p.get("alpha", "1"), p.get("beta1", "0"),
                             p.get("beta2", "0"), p.get("kappa", "0"), domain,
                             name=p.get("name", "custom"))


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Read ``path`` and apply ``overrides`` (keys as in the ``[run]`` section, ``None`` skipped)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if path is not None:
        with open(path) as fh:
            cp.read_file(fh)
    return config_from_parser(cp, overrides)


def config_from_parser(cp: configparser.ConfigParser, overrides: dict | None = None) -> RunConfig:
    run = dict(cp["run"]) if "run" in cp else {}
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ValueError(f"unknown [run] keys: {', '.join(sorted(unknown))}")
    for k, v in (overrides or {}).items():
        if v is not None:
            run[k] = v
    if "problem" not in run:
        raise ValueError("no problem given")
    if "n" not in run:
        raise ValueError("no grid sizes given")

    def flag(key, default):
        v = run.get(key, default)
        if isinstance(v, bool):
            return v
        return cp.BOOLEAN_STATES[str(v).strip().lower()]

    problem = run["problem"]
    if problem == "custom":
        problem = problem_from_config(cp)
    sizes = run["n"] if isinstance(run["n"], list) else parse_sizes(run["n"])
    return RunConfig(
        problem=problem, Ns=sizes, solver=run.get("solver", "auto"), out=run.get("out"),
        csv=flag("csv", False), table=flag("table", True), plot=flag("plot", False),
        dump_stencils=flag("dump_stencils", False), dump_grid=flag("dump_grid", False),
        matrix_market=flag("matrix_market", False), fallback=flag("fallback", True),
        equilibrate=flag("equilibrate", True),
        eps_slope=float(run.get("eps_slope", 1e-6)),
    )

