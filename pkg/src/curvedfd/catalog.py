"""Built-in benchmark problems on leaf-shaped and thin annular domains."""

from __future__ import annotations

from .geometry import Domain, radial_leaf
from .problem import ProblemSpec, make_manufactured

# exponential coefficient family shared by the 20-leaf and thin-annulus cases
_EXP_COEFFS = dict(alpha="exp(x+y)", beta1="exp(x-y)", beta2="cos(x)*cos(y)", kappa="exp(x+y)")
_TRIG_COEFFS = dict(alpha="4+sin(4*x)*cos(4*y)", beta1="sin(x+2*y)",
                    beta2="cos(2*x)*cos(3*y)", kappa="cos(3*x+y)")


def _thin(inner_offset, frequency):
    return Domain.annulus(radial_leaf(0.35, 0.02, frequency),
                          radial_leaf(inner_offset, 0.02, frequency))


_CATALOG = {
    "example1": dict(
        u="sin(6*x)*cos(6*y)", coeffs=_EXP_COEFFS,
        domain=lambda: Domain.single(radial_leaf(0.3, 0.2, 20)),
        description="20-leaf domain, u = sin 6x cos 6y"),
    "example2a": dict(
        u="cos(10*(x-y))", coeffs=_TRIG_COEFFS,
        domain=lambda: Domain.annulus(radial_leaf(0.3, 0.16, 5), radial_leaf(0.2, 0.15, 5)),
        description="annulus between two 5-leaf curves, u = cos 10(x-y)"),
    "example2b": dict(
        u="cos(5*(x-y))", coeffs=_TRIG_COEFFS,
        domain=lambda: Domain.annulus(radial_leaf(0.35, 0.1, 20), radial_leaf(0.1, 0.05, 5)),
        description="annulus between 5-leaf and 20-leaf curves, u = cos 5(x-y)"),
    "example3a": dict(
        u="sin(4*x)*cos(4*y)", coeffs=_EXP_COEFFS, domain=lambda: _thin(0.33, 20),
        description="thin 20-leaf annulus, u = sin 4x cos 4y"),
    "example3b": dict(
        u="sin(10*x)*cos(10*y)", coeffs=_EXP_COEFFS, domain=lambda: _thin(0.33, 40),
        description="thin 40-leaf annulus, u = sin 10x cos 10y"),
    "example3c": dict(
        u="sin(50*x)*cos(50*y)", coeffs=_EXP_COEFFS, domain=lambda: _thin(0.33, 100),
        description="thin 100-leaf annulus, u = sin 50x cos 50y"),
    "example3d": dict(
        u="sin(50*x)*cos(50*y)", coeffs=_EXP_COEFFS, domain=lambda: _thin(0.349, 20),
        description="nearly overlapping 20-leaf annulus, u = sin 50x cos 50y"),
}


def problem_names():
    return list(_CATALOG)


def describe(name: str) -> str:
    return _CATALOG[name]["description"]


def get_problem(name: str) -> ProblemSpec:
    try:
        entry = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; available: {', '.join(_CATALOG)}") from None
    return make_manufactured(entry["u"], domain=entry["domain"](), name=name, **entry["coeffs"])
