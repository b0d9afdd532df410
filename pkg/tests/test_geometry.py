import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvedfd.catalog import get_problem, problem_names
from curvedfd.exceptions import NudgeFailed, UnsupportedOrder
from curvedfd.geometry import (DEGENERATE_RATIOS, Domain, ExpressionCurve, PointClass,
                               Projection, RadialCurve, curve_eval, is_degenerate,
                               nudge_projection, radial_leaf)

from oracles import DenseProjector, near_boundary_points, orthogonality


def circle(r=0.3):
    return RadialCurve(r, 0.0, 0)


def test_circle_derivatives_at_zero():
    (p, q), (p1, q1) = curve_eval(circle(), 0.0, 1)
    assert (p, q) == pytest.approx((0.3, 0.0))
    assert (p1, q1) == pytest.approx((0.0, 0.3))


def test_leaf_derivatives_at_quarter_turn():
    (p, q), (p1, q1) = curve_eval(radial_leaf(0.3, 0.2, 20), math.pi / 2, 1)
    assert (p, q) == pytest.approx((0.0, 0.3), abs=1e-14)
    assert (p1, q1) == pytest.approx((-0.3, 4.0), abs=1e-13)


def test_unsupported_order():
    with pytest.raises(UnsupportedOrder):
        circle().derivs(0.1, 4)


@pytest.mark.parametrize("curve", [
    radial_leaf(0.3, 0.2, 20),
    radial_leaf(0.2, 0.15, 5),
    ExpressionCurve("0.3*cos(t) + 0.05*cos(3*t)", "0.25*sin(t)"),
])
def test_derivatives_match_central_differences(curve):
    t = np.linspace(0.1, 6.0, 17)
    delta = 1e-5
    for m in range(1, 4):
        lo = curve.derivs(t - delta, m - 1)[m - 1]
        hi = curve.derivs(t + delta, m - 1)[m - 1]
        exact = curve.derivs(t, m)[m]
        for k in range(2):
            fd = (hi[k] - lo[k]) / (2 * delta)
            scale = np.abs(exact[k]).max()
            assert np.abs(fd - exact[k]).max() <= 1e-6 * scale


@given(st.floats(-20, 20))
def test_periodicity(t0):
    curve = radial_leaf(0.3, 0.2, 20)
    a = np.array(curve.eval(t0))
    b = np.array(curve.eval(t0 + curve.period))
    assert np.allclose(a, b, atol=1e-12)


def test_expression_curve_is_closed():
    curve = ExpressionCurve("0.3*cos(t)", "0.2*sin(t) + 0.01*sin(2*t)^2")
    assert np.allclose(curve.eval(0.0), curve.eval(curve.period), atol=1e-12)


def test_classification_examples():
    assert get_problem("example1").domain.classify((0.0, 0.0)) == PointClass.INSIDE
    assert get_problem("example2a").domain.classify((0.0, 0.0)) == PointClass.OUTSIDE
    assert Domain.single(circle()).classify((0.3, 0.0)) == PointClass.ON_BOUNDARY


def test_generic_membership_agrees_with_radial():
    leaf = radial_leaf(0.3, 0.1, 5)
    r = "(0.3 + 0.1*sin(5*t))"
    generic = ExpressionCurve(f"{r}*cos(t)", f"{r}*sin(t)")
    pts = np.random.default_rng(3).uniform(-0.45, 0.45, (4000, 2))
    a = Domain.single(leaf).classify_many(pts)
    b = Domain.single(generic).classify_many(pts)
    assert np.array_equal(a, b)


def test_annulus_rejects_crossing_curves():
    with pytest.raises(ValueError):
        Domain.annulus(circle(0.3), circle(0.35))


def test_projection_onto_circle():
    pr = Domain.single(circle()).project((0.15, 0.0))
    assert pr.t_star == pytest.approx(0.0, abs=1e-12)
    assert pr.foot == pytest.approx((0.3, 0.0), abs=1e-12)
    assert pr.distance == pytest.approx(0.15, abs=1e-12)


def test_projection_of_curve_point_is_fixed():
    curve = radial_leaf(0.3, 0.2, 20)
    pt = curve.eval(1.234)
    pr = Domain.single(curve).project(pt)
    assert pr.distance <= 1e-12
    assert pr.foot == pytest.approx(tuple(pt), abs=1e-12)


def test_projection_picks_inner_curve_of_annulus():
    dom = get_problem("example2a").domain
    inner = dom.curves[1]
    (x, y), (p1, q1) = inner.derivs(0.7, 1)
    nrm = math.hypot(p1, q1)
    # step off the inner curve into the annulus
    pt = np.array([x, y]) + 0.004 * np.array([q1, -p1]) / nrm
    if dom.classify(pt) != PointClass.INSIDE:
        pt = np.array([x, y]) - 0.004 * np.array([q1, -p1]) / nrm
    pr = dom.project(pt)
    assert pr.curve_index == 1
    ref = DenseProjector(inner).distance(pt[None, :])[0]
    assert abs(pr.distance - ref) <= 1e-8


@pytest.mark.parametrize("name", problem_names())
def test_projection_orthogonal_and_matches_dense_oracle(name):
    dom = get_problem(name).domain
    pts = near_boundary_points(dom, 200, 2 / 256, np.random.default_rng(11))
    pr = dom.project_many(pts)
    resid, floor = orthogonality(dom, pts, pr)
    assert np.all(resid <= np.maximum(1e-10, floor))
    for k in range(len(pts)):
        foot = dom.curves[pr.curve[k]].eval(pr.t[k])
        assert tuple(foot) == pytest.approx((pr.fx[k], pr.fy[k]), abs=1e-12)
    ref = np.min([DenseProjector(c, 200_000).distance(pts, k=4) for c in dom.curves], axis=0)
    assert np.abs(pr.distance - ref).max() <= 1e-8


def test_classification_consistent_with_distance():
    dom = get_problem("example1").domain
    pts = near_boundary_points(dom, 300, 1e-3, np.random.default_rng(5))
    cls = dom.classify_many(pts)
    d = dom.project_many(pts).distance
    assert np.all((d > dom.boundary_tolerance) == (cls != PointClass.ON_BOUNDARY))


def test_is_degenerate_on_all_six_ratios():
    for c in DEGENERATE_RATIOS:
        assert is_degenerate(1.0, c, 1e-6)
    assert not is_degenerate(0.0, 1.0, 1e-6)
    assert not is_degenerate(2.0, 1.0, 1e-6)
    assert is_degenerate(1.0, math.sqrt(3) * (1 + 1e-12), 1e-6)


def _straight_projection(domain, t):
    curve = domain.curves[0]
    (p, q), (p1, q1) = curve.derivs(t, 1)
    return Projection(float(t), (float(p), float(q)), 0.0, 0, float(q1 / p1))


@pytest.mark.parametrize("target", DEGENERATE_RATIOS)
def test_nudge_escapes_degenerate_tangents(target):
    curve = circle()
    dom = Domain.single(curve)
    # on a circle the tangent ratio is -cot t, so solve for the degenerate parameter
    t = math.atan2(-1.0, target) % (2 * math.pi)
    pr = _straight_projection(dom, t)
    assert is_degenerate(-math.sin(t), math.cos(t), 1e-6)
    moved = nudge_projection(pr, dom, h=1 / 256)
    assert moved.nudged
    (_, _), (p1, q1) = curve.derivs(moved.t_star, 1)
    assert not is_degenerate(p1, q1, 1e-6)
    assert moved.foot == pytest.approx(tuple(curve.eval(moved.t_star)), abs=1e-14)


def test_nudge_leaves_vertical_tangent_alone():
    dom = Domain.single(circle())
    pr = _straight_projection(dom, 0.0)
    assert nudge_projection(pr, dom, h=1 / 64) is pr


def test_nudge_fails_with_no_retries():
    dom = Domain.single(circle())
    pr = _straight_projection(dom, math.pi / 4)
    with pytest.raises(NudgeFailed):
        nudge_projection(pr, dom, h=1e-300, max_retries=1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.05, 0.3))
def test_projection_of_radial_offsets(t, frac):
    curve = radial_leaf(0.3, 0.05, 3)
    dom = Domain.single(curve)
    (x, y), (p1, q1) = curve.derivs(t, 1)
    nrm = math.hypot(p1, q1)
    off = frac * 0.05
    pt = (x - off * q1 / nrm, y + off * p1 / nrm)
    pr = dom.project(pt)
    assert pr.distance <= off + 1e-12
    (fx, fy), (a1, b1) = curve.derivs(pr.t_star, 1)
    dx, dy = pt[0] - fx, pt[1] - fy
    assert abs(dx * a1 + dy * b1) <= 1e-10 * math.hypot(dx, dy) * math.hypot(a1, b1) + 1e-15
