import numpy as np
import pytest

from curvedfd.catalog import get_problem
from curvedfd.stencil_regular import (OFFSETS, regular_coefficients, regular_rhs,
                                      regular_stencil)

from oracles import regular_retyped, truncation_slope


def zero_partials(**vals):
    keys = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    return {name: {k: vals.get(f"{name}{k[0]}{k[1]}", 0.0) for k in keys} for name in "abdf"}


def test_laplace_constants():
    C = regular_coefficients(zero_partials(), 0.1)
    for (r, l), c in C.items():
        expect = -10 / 3 if (r, l) == (0, 0) else (1 / 6 if r and l else 2 / 3)
        assert c == pytest.approx(expect, abs=1e-15)


def test_stencil_array_layout():
    tf = get_problem("example1").transformed.partials(np.array([0.0, 0.05]), np.array([0.0, 0.1]))
    st = regular_stencil(tf, 1 / 64)
    assert st.C.shape == (2, 3, 3)
    single = regular_coefficients(get_problem("example1").transformed.partials(0.05, 0.1), 1 / 64)
    for r, l in OFFSETS:
        assert st.C[1, r + 1, l + 1] == pytest.approx(single[(r, l)], rel=1e-15)


def random_tuple(rng):
    names = ["a00", "a10", "a01", "a20", "a02", "b00", "b10", "b01", "b20", "b02",
             "d00", "d10", "d01", "d20", "d02"]
    return dict(zip(names, rng.uniform(-3, 3, len(names))))


def test_matches_retyped_copy():
    rng = np.random.default_rng(7)
    for _ in range(50):
        v = random_tuple(rng)
        h = rng.uniform(1e-3, 0.2)
        C = regular_coefficients(zero_partials(**v), h)
        ref = regular_retyped(v["a00"], v["b00"], v["d00"], v["a10"], v["a01"], v["b10"], v["b01"],
                              v["d10"], v["d01"], v["a20"] + v["a02"], v["b20"] + v["b02"],
                              v["d20"] + v["d02"], h)
        for k in OFFSETS:
            assert C[k] == pytest.approx(ref[k], rel=1e-12, abs=1e-14)


def test_antisymmetric_corner_difference():
    rng = np.random.default_rng(8)
    for _ in range(20):
        v = random_tuple(rng)
        h = rng.uniform(1e-3, 0.2)
        C = regular_coefficients(zero_partials(**v), h)
        assert C[(1, 1)] - C[(-1, -1)] == pytest.approx((v["a00"] + v["b00"]) * h / 6, rel=1e-12)


def test_h_zero_sums():
    C = regular_coefficients(zero_partials(**random_tuple(np.random.default_rng(1))), 0.0)
    assert sum(C.values()) == pytest.approx(0.0, abs=1e-14)
    assert sum(c for (r, l), c in C.items() if (r, l) != (0, 0)) == pytest.approx(10 / 3)


def test_rhs_formula():
    v = {"f00": 2.0, "f10": 3.0, "f01": -1.0, "f20": 0.5, "f02": 0.25, "a00": 1.5, "b00": -2.0}
    F = regular_rhs(zero_partials(**v), 0.1)
    assert F == pytest.approx(2.0 + 0.01 / 12 * (1.5 * 3.0 + 2.0 + 0.75))


@pytest.mark.parametrize("center", [(0.0, 0.0), (0.05, -0.08), (-0.11, 0.02)])
def test_truncation_order_is_four(center):
    slope = truncation_slope(get_problem("example1"), *center)
    assert 3.6 <= slope <= 4.4
