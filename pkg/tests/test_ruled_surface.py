import math

import numpy as np
import pytest

from ruledgeom import (DegenerateSpec, LeftChartDomain, RankDeficientPlane, RuledSurfaceSpec, build_spec,
                       curvature_grid, curvature_report, euclidean, evaluate_jet, hyperbolic_halfspace,
                       load_scenario, ruling_sweep)
from ruledgeom.manifold import inner
from ruledgeom.ruled_surface import ruling_angle

from conftest import circle_spec, helicoid_spec


def test_helicoid_jets_and_curvature():
    spec = helicoid_spec()
    u, v = 0.7, 1.3
    j = evaluate_jet(spec, u, v)
    assert np.allclose(j.point, [v * math.cos(u), v * math.sin(u), u], atol=1e-12)
    assert np.allclose(j.Xu, [-v * math.sin(u), v * math.cos(u), 1.0], atol=1e-12)
    assert np.allclose(j.Xv, [math.cos(u), math.sin(u), 0.0], atol=1e-12)
    rep = curvature_report(spec, u, v)
    assert rep.K_ext == pytest.approx(-1 / (1 + v * v) ** 2, rel=1e-10)
    assert rep.K_ambient == 0.0
    assert abs(rep.lam) == pytest.approx(1.0, rel=1e-10)
    assert abs(rep.h_uv) == pytest.approx(1 / math.sqrt(1 + v * v), rel=1e-10)
    assert rep.sigma == pytest.approx(math.pi / 2)


def test_cylinder_is_flat():
    sc = load_scenario("cylinder")
    spec = build_spec(sc)
    rep = curvature_grid(spec, np.linspace(0, 6, 7), np.linspace(-1, 1, 5))
    assert np.all(np.abs(rep.K_ext) < 1e-20)
    assert not rep.lam_defined.any()


def test_example1_norm_growth():
    # in the half-space example |X_u|^2 / 2 has v-derivative exp(2v)
    spec = build_spec(load_scenario("example1"))
    v = np.linspace(-2, 2, 9)
    j = ruling_sweep(spec, [0.3, 2.0], v)
    g = spec.metric.metric(j.point)
    assert np.allclose(inner(g, j.Xu, j.DXu), np.exp(2 * j.v), rtol=1e-9)
    rep = curvature_grid(spec, None, None, jets=j)
    assert np.max(np.abs(rep.K_ext)) < 1e-12
    assert np.allclose(rep.K_ambient, -1.0)


def test_cone_apex_is_rank_deficient():
    spec = circle_spec(euclidean(), [0, 0, 0], 1.0,
                       lambda u: -np.stack([np.cos(u), np.sin(u), np.zeros_like(u)], axis=-1))
    with pytest.raises(RankDeficientPlane):
        curvature_report(spec, 0.3, 1.0)
    rep = curvature_grid(spec, [0.3], [0.0, 1.0])
    assert rep.rank2[0, 0] and not rep.rank2[0, 1]
    assert math.isnan(rep.K_ext[0, 1])


def test_leaving_the_chart():
    m = hyperbolic_halfspace(-1.0)
    spec = RuledSurfaceSpec(m, lambda u: np.array([u, 0.0, 1.0]), lambda u: np.array([0.0, 0.0, -1.0]),
                            alpha_prime=lambda u: np.array([1.0, 0.0, 0.0]),
                            ruling_prime=lambda u: np.zeros(3))
    # vertical half-space geodesics never reach z = 0: no exit
    evaluate_jet(spec, 0.0, 30.0)
    flat = RuledSurfaceSpec(m.__class__(euclidean().metric, domain=lambda x: x[..., 2] > 0.5),
                            spec.alpha, spec.ruling, spec.alpha_prime, spec.ruling_prime)
    with pytest.raises(LeftChartDomain) as info:
        evaluate_jet(flat, 0.0, 1.0)
    assert info.value.exit_param == pytest.approx(0.5, abs=1e-9)


def test_degenerate_spec():
    spec = RuledSurfaceSpec(euclidean(), lambda u: np.zeros(3), lambda u: np.array([1.0, 0, 0]))
    with pytest.raises(DegenerateSpec):
        spec.base(0.0)


def test_ruling_angle_matches_jets(rng):
    spec = build_spec(load_scenario("example3"))
    for u, v in ((0.4, 0.3), (2.0, -0.5)):
        j = evaluate_jet(spec, u, v)
        g = spec.metric.metric(j.point)
        direct = math.acos(inner(g, j.Xu, j.Xv) / math.sqrt(inner(g, j.Xu, j.Xu) * inner(g, j.Xv, j.Xv)))
        assert ruling_angle(spec, u, v) == pytest.approx(direct, abs=1e-9)


def brioschi(E, F, G, h):
    """Gauss curvature from the first fundamental form on a 3x3 stencil (index [iu, iv])."""
    d_u = lambda A: (A[2, 1] - A[0, 1]) / (2 * h)
    d_v = lambda A: (A[1, 2] - A[1, 0]) / (2 * h)
    d_uu = lambda A: (A[2, 1] - 2 * A[1, 1] + A[0, 1]) / h**2
    d_vv = lambda A: (A[1, 2] - 2 * A[1, 1] + A[1, 0]) / h**2
    d_uv = lambda A: (A[2, 2] - A[2, 0] - A[0, 2] + A[0, 0]) / (4 * h * h)
    e, f, g = E[1, 1], F[1, 1], G[1, 1]
    M1 = np.array([[-d_vv(E) / 2 + d_uv(F) - d_uu(G) / 2, d_u(E) / 2, d_u(F) - d_v(E) / 2],
                   [d_v(F) - d_u(G) / 2, e, f],
                   [d_v(G) / 2, f, g]])
    M2 = np.array([[0, d_v(E) / 2, d_u(G) / 2], [d_v(E) / 2, e, f], [d_u(G) / 2, f, g]])
    return (np.linalg.det(M1) - np.linalg.det(M2)) / (e * g - f * f) ** 2


@pytest.mark.parametrize("name,u,v", [("sphere_tangent", 0.8, 0.6), ("example2", 1.1, 0.9),
                                      ("example3", 0.5, 0.4), ("helicoid", 0.2, 0.7)])
def test_gauss_equation_against_intrinsic_curvature(name, u, v):
    spec = build_spec(load_scenario(name))
    h = 2e-3
    j = ruling_sweep(spec, [u - h, u, u + h], [v - h, v, v + h])
    g = spec.metric.metric(j.point)
    E, F, G = inner(g, j.Xu, j.Xu), inner(g, j.Xu, j.Xv), inner(g, j.Xv, j.Xv)
    rep = curvature_grid(spec, None, None, jets=j)
    assert rep.K_intrinsic[1, 1] == pytest.approx(brioschi(E, F, G, h), abs=5e-5)
