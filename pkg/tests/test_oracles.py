import math

import numpy as np
import pytest

from ruledgeom import ChartSingularity, SpaceFormTag, oracle_geodesic, oracle_jacobi_norm
from ruledgeom.manifold import inner, sphere, hyperbolic_halfspace


def test_tag_checks_chart():
    assert SpaceFormTag(1.0).chart == "stereographic"
    assert SpaceFormTag(-1.0).chart == "halfspace"
    with pytest.raises(ValueError):
        SpaceFormTag(1.0, chart="halfspace")


def test_initial_conditions():
    for k, p in ((1.0, [0.2, 0.1, 0.0]), (-1.0, [0.0, 0.3, 1.2]), (0.0, [1.0, 2.0, 3.0])):
        Z = np.array([0.3, -0.2, 0.4])
        x, xd = oracle_geodesic(SpaceFormTag(k), np.array(p), Z, 0.0)
        assert np.allclose(x, p) and np.allclose(xd, Z)


def test_oracle_speed_is_constant():
    m = sphere(2.0)
    p = np.array([0.1, 0.2, -0.1])
    Z = np.array([0.4, 0.1, -0.3])
    s0 = math.sqrt(inner(m.metric(p), Z, Z))
    for v in np.linspace(0, 2, 7):
        x, xd = oracle_geodesic(SpaceFormTag(2.0), p, Z, v)
        assert math.sqrt(inner(m.metric(x), xd, xd)) == pytest.approx(s0, rel=1e-12)


def test_halfspace_vertical_and_semicircle():
    m = hyperbolic_halfspace(-1.0)
    x, _ = oracle_geodesic(SpaceFormTag(-1.0), np.array([0, 0, 1.0]), np.array([0, 0, 1.0]), 2.0)
    assert np.allclose(x, [0, 0, math.exp(2.0)])
    # a horizontal start traces a semicircle centred on the boundary
    p = np.array([0.0, 0.0, 1.0])
    for v in (0.5, 1.0, 3.0):
        x, xd = oracle_geodesic(SpaceFormTag(-1.0), p, np.array([1.0, 0, 0]), v)
        assert x[0] ** 2 + x[2] ** 2 == pytest.approx(1.0)
        assert math.sqrt(inner(m.metric(x), xd, xd)) == pytest.approx(1.0)


def test_sphere_pole_is_singular():
    # a great circle through the antipode of the chart origin reaches infinity at distance pi
    with pytest.raises(ChartSingularity):
        oracle_geodesic(SpaceFormTag(1.0), np.zeros(3), np.array([0.5, 0, 0]), math.pi)


def test_jacobi_norm_closed_forms():
    tag = SpaceFormTag(1.0)
    assert oracle_jacobi_norm(tag, 0.0, 0.0, 1.0, math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert oracle_jacobi_norm(SpaceFormTag(-1.0), 0.0, 0.0, 0.0, 1.0, dw_norm=1.0) == pytest.approx(math.sinh(1.0))
    assert oracle_jacobi_norm(SpaceFormTag(0.0), 1.0, 2.0, 0.0, 3.0) == pytest.approx(7.0)
