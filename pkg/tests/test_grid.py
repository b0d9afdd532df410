import csv
import math

import numpy as np
import pytest

from curvedfd.catalog import get_problem
from curvedfd.exceptions import MeshTooCoarse
from curvedfd.geometry import Domain, ExpressionCurve, PointClass, radial_leaf
from curvedfd.grid import (CENTER, OFFSETS, GridSpec, NodeClass, build_grid, support_set,
                           write_grid_csv)


@pytest.fixture(scope="module")
def disk32():
    return build_grid(Domain.single(radial_leaf(0.3, 0.0, 0)), 32)


def test_offsets_layout():
    assert OFFSETS[CENTER] == (0, 0)
    assert len(OFFSETS) == 9 and len(set(OFFSETS)) == 9


def test_gridspec_covers_domain(disk32):
    spec = disk32.spec
    assert spec.h * spec.N == 1.0
    assert spec.i_min * spec.h < -0.3 and spec.i_max * spec.h > 0.3
    assert spec.j_min * spec.h < -0.3 and spec.j_max * spec.h > 0.3
    # border rows stay exterior so neighbours never leave the box
    for edge in (disk32.classes[0], disk32.classes[-1], disk32.classes[:, 0], disk32.classes[:, -1]):
        assert np.all(edge == NodeClass.EXTERIOR)


def test_disk_examples(disk32):
    assert disk32.node_class(0, 0) == NodeClass.REGULAR
    assert disk32.node_class(9, 0) == NodeClass.IRREGULAR
    assert disk32.node_class(10, 0) == NodeClass.EXTERIOR


def test_class_definitions_hold(disk32):
    dom = disk32.domain
    for cls in (NodeClass.REGULAR, NodeClass.IRREGULAR):
        ii, jj = disk32.nodes_of(cls)
        for i, j in zip(ii, jj):
            assert dom.classify((i / 32, j / 32)) == PointClass.INSIDE
            block = [dom.classify(((i + r) / 32, (j + l) / 32)) != PointClass.OUTSIDE
                     for r, l in OFFSETS]
            assert all(block) == (cls == NodeClass.REGULAR)


def test_too_coarse():
    dom = Domain.single(radial_leaf(0.3, 0.0, 0))
    with pytest.raises(MeshTooCoarse):
        build_grid(dom, 4)
    with pytest.raises(MeshTooCoarse):
        build_grid(Domain.single(radial_leaf(0.02, 0.0, 0)), 16)


def test_leaf_area_estimate():
    grid = build_grid(get_problem("example1").domain, 32)
    counts = grid.counts()
    assert counts["REGULAR"] > 0 and counts["IRREGULAR"] > 0
    inside = counts["REGULAR"] + counts["IRREGULAR"]
    # area of r = 0.3 + 0.2 sin 20t is pi (0.3^2 + 0.2^2 / 2)
    area = math.pi * (0.3 ** 2 + 0.2 ** 2 / 2)
    assert abs(inside - area * 32 ** 2) <= 0.1 * area * 32 ** 2


def test_counts_scale_with_refinement():
    dom = get_problem("example1").domain
    c1 = build_grid(dom, 128).counts()
    c2 = build_grid(dom, 256).counts()
    assert 2 / 1.5 <= c2["IRREGULAR"] / c1["IRREGULAR"] <= 2 * 1.5
    assert 4 / 1.5 <= c2["REGULAR"] / c1["REGULAR"] <= 4 * 1.5


def test_vertical_boundary_support_set():
    # a wide ellipse-like curve whose right side is nearly a straight vertical line near y = 0
    dom = Domain.single(ExpressionCurve("0.3*cos(t)", "3*sin(t)"))
    grid = build_grid(dom, 32)
    ctx = support_set(grid, 9, 0)
    assert ctx.S == frozenset({(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1)})
    assert ctx.w == pytest.approx((9 / 32 - 0.3) * 32, abs=1e-12)
    assert ctx.v == pytest.approx(0.0, abs=1e-12)


def test_diagonal_corner_cut():
    grid = build_grid(Domain.single(radial_leaf(0.3, 0.0, 0)), 32)
    ii, jj = grid.nodes_of(NodeClass.IRREGULAR)
    sizes = {len(support_set(grid, int(i), int(j)).S) for i, j in zip(ii, jj)}
    assert 8 in sizes


@pytest.mark.parametrize("name", ["example3a", "example3b"])
def test_thin_annulus_invariants(name):
    grid = build_grid(get_problem(name).domain, 256)
    irr = grid.irregular()
    size = irr.member.sum(axis=1)
    assert np.all((size >= 4) & (size <= 8))
    assert np.all(irr.member[:, CENTER])
    assert np.all(np.hypot(irr.w, irr.v) <= 1.5)


def test_support_set_matches_batch(disk32):
    irr = disk32.irregular()
    for k in range(0, len(irr), 7):
        ctx = support_set(disk32, int(irr.i[k]), int(irr.j[k]))
        assert ctx.S == irr.context(k, disk32.domain).S
        assert ctx.w == pytest.approx(irr.w[k], abs=1e-12)
        assert ctx.v == pytest.approx(irr.v[k], abs=1e-12)


def test_support_members_are_not_exterior(disk32):
    irr = disk32.irregular()
    for k in range(len(irr)):
        for (r, l), m in zip(OFFSETS, irr.member[k]):
            cls = disk32.node_class(int(irr.i[k]) + r, int(irr.j[k]) + l)
            assert m == (cls != NodeClass.EXTERIOR)


def test_strict_irregular_raises_on_tiny_support():
    grid = build_grid(get_problem("example3c").domain, 256)
    with pytest.raises(MeshTooCoarse):
        grid.irregular(strict=True)
    relaxed = grid.irregular(strict=False)
    assert relaxed.member.sum(axis=1).min() < 4


def test_support_set_rejects_non_irregular(disk32):
    with pytest.raises(ValueError):
        support_set(disk32, 0, 0)


def test_grid_csv(tmp_path, disk32):
    path = tmp_path / "grid.csv"
    write_grid_csv(disk32, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["i", "j", "x", "y", "class"]
    assert len(rows) == disk32.classes.size
    names = {r["class"] for r in rows}
    assert {"EXTERIOR", "REGULAR", "IRREGULAR"} <= names <= {c.name for c in NodeClass}
    row = next(r for r in rows if r["i"] == "9" and r["j"] == "0")
    assert row["class"] == "IRREGULAR" and float(row["x"]) == 9 / 32


def test_gridspec_covering_pads_one_cell():
    spec = GridSpec.covering(Domain.single(radial_leaf(0.25, 0.0, 0)), 8)
    assert (spec.i_min, spec.i_max) == (-3, 3)


def test_require_regular_can_be_waived():
    dom = get_problem("example3d").domain
    with pytest.raises(MeshTooCoarse):
        build_grid(dom, 256)
    grid = build_grid(dom, 256, require_regular=False)
    counts = grid.counts()
    assert counts["REGULAR"] == 0 and counts["IRREGULAR"] > 0
