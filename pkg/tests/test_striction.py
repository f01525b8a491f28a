import math

import numpy as np
import pytest

from ruledgeom import (HypothesisViolated, RuledSurfaceSpec, build_spec, curvature_grid, euclidean,
                       find_striction_numeric, hyperbolic_halfspace, load_scenario, sphere)
from ruledgeom.ruled_surface import evaluate_jet
from ruledgeom.manifold import inner
from ruledgeom.striction import (base_terms, evaluate_F, hyperbolic_nonexistence_classifier, rebase_on_branch,
                                 spaceform_coefficients, spaceform_F, spaceform_striction_v)
from ruledgeom.verification import random_family

from conftest import circle_spec, helicoid_spec, hyperbolic_helicoid


def _space(k):
    return {1: sphere(1.0), 0: euclidean(), -1: hyperbolic_halfspace(-1.0)}[k]


def _points(k, rng, n):
    if k > 0:
        return rng.uniform(-0.03, 0.03, (n, 3)), 0.5
    if k < 0:
        return np.column_stack([rng.uniform(-1, 1, (n, 2)), np.ones(n)]), 1.0
    return rng.uniform(-1, 1, (n, 3)), 1.0


@pytest.mark.parametrize("k", [1, 0, -1])
def test_F_is_half_the_v_derivative_of_the_squared_speed(k, rng):
    pts, scale = _points(k, rng, 1)
    spec = random_family(rng, _space(k), pts, scale)
    m, h = spec.metric, 1e-4

    def sq(v):
        j = evaluate_jet(spec, 0.05, v)
        return float(inner(m.metric(j.point), j.Xu, j.Xu))

    for v in (0.0, 0.3, -0.2):
        fd = (sq(v + h) - sq(v - h)) / (4 * h)
        assert evaluate_F(spec, 0.05, v).F == pytest.approx(fd, abs=1e-7)


@pytest.mark.parametrize("k", [1, 0, -1])
def test_closed_form_against_integration(k, rng):
    pts, scale = _points(k, rng, 1)
    spec = random_family(rng, _space(k), pts, scale)
    u = 0.1
    c = spaceform_coefficients(spec, [u], k)[0]
    for v in (0.0, 0.25, -0.4):
        assert spaceform_F(c, v) == pytest.approx(evaluate_F(spec, u, v).F, abs=1e-8)
    # F'(0) from the base terms against the jet formula
    t = base_terms(spec, [u], k)
    assert t.D[0] == pytest.approx(evaluate_F(spec, u, 0.0).dFdv, abs=1e-8)


def test_euclidean_helicoid_root_on_axis():
    spec = helicoid_spec()
    vd = spaceform_striction_v(spec, [0.0, 1.0], 0)
    assert all(v.kind == "found" and v.v == pytest.approx(0.0, abs=1e-14) for v in vd)
    res = find_striction_numeric(spec, [0.0, 1.0], (-1, 1.3), n_coarse=9)
    assert len(res.branches) == 1
    assert np.allclose(res.branches[0].v, 0.0, atol=1e-12)


def test_numeric_matches_closed_form_off_the_base(rng):
    m = euclidean()
    spec = circle_spec(m, (0, 0, 0), 1.0, lambda u: np.stack([np.zeros_like(u), np.cos(u), np.ones_like(u)], -1))
    u = np.linspace(0.2, 2.8, 5)
    closed = spaceform_striction_v(spec, u, 0)
    res = find_striction_numeric(spec, u, (-8, 8), n_coarse=33)
    for c, vd in zip(closed, res.verdicts):
        assert vd.kind == c.kind
        if c.kind == "found":
            assert vd.v == pytest.approx(c.v, abs=1e-9)


def test_example3_central_points():
    spec = build_spec(load_scenario("example3"))
    u = np.linspace(0, 6, 4)
    res = find_striction_numeric(spec, u, (-0.68, 2.25), n_coarse=16)
    assert all(vd.kind == "found" for vd in res.verdicts)
    assert np.allclose([vd.v for vd in res.verdicts], math.pi / 4, atol=1e-9)
    assert all(len(vd.roots) == 1 for vd in res.verdicts)


def test_cylinder_is_degenerate():
    spec = build_spec(load_scenario("cylinder"))
    assert all(v.kind == "degenerate" for v in spaceform_striction_v(spec, [0.0, 2.0], 0))
    res = find_striction_numeric(spec, [0.0, 2.0], (-1, 1), n_coarse=5)
    assert all(v.kind == "degenerate" for v in res.verdicts)
    assert res.branches == []


def test_sphere_roots_are_reduced_to_one_period(s3):
    spec = circle_spec(s3, (0, 0, 0), 0.3, lambda u: np.stack([np.zeros_like(u), np.cos(u), np.ones_like(u)], -1))
    u = [0.4]
    period = 2 * math.pi
    res = find_striction_numeric(spec, u, (-4.0, 8.0), n_coarse=40)
    closed = spaceform_striction_v(spec, u, 1.0)[0]
    got = [r.v for r in res.verdicts[0].roots]
    assert all(0 <= v < period for v in got)
    assert len(got) == len(closed.roots) == 4
    assert np.allclose(got, closed.roots, atol=1e-8)


def test_hyperbolic_helicoid_has_a_central_line():
    spec = hyperbolic_helicoid(rate=2.0)
    u = np.linspace(-0.5, 0.5, 3)
    t = base_terms(spec, u, -1.0)
    assert np.allclose(t.D, 5.0)  # -k |alpha'|^2 sin^2 sigma + |W|^2 = 1 + 4
    cl = hyperbolic_nonexistence_classifier(spec, u, -1.0)
    assert not cl.no_striction.any() and cl.consistent
    vd = spaceform_striction_v(spec, u, -1.0)
    assert all(v.kind == "found" and abs(v.v) < 1e-12 for v in vd)


def test_example1_classifier():
    spec = build_spec(load_scenario("example1"))
    u = np.linspace(0, 3, 7)
    cl = hyperbolic_nonexistence_classifier(spec, u, -1.0)
    assert cl.no_striction.all() and cl.consistent
    assert np.allclose(cl.kappa1, 1.0)


def test_classifier_hypotheses(s3):
    with pytest.raises(HypothesisViolated):
        hyperbolic_nonexistence_classifier(helicoid_spec(), [0.0], 1.0)
    slow = RuledSurfaceSpec(hyperbolic_halfspace(-1.0), lambda u: np.stack([0 * u, 0 * u, np.exp(2 * u)], -1),
                            lambda u: np.stack([np.exp(2 * u), 0 * u, 0 * u], -1))
    with pytest.raises(HypothesisViolated):
        hyperbolic_nonexistence_classifier(slow, [0.0], -1.0)


@pytest.mark.parametrize("k", [0, 1])
def test_rebase_on_a_striction_branch(k, rng):
    pts, scale = _points(k, rng, 1)
    spec = random_family(rng, _space(k), pts, scale)
    u = np.linspace(-0.3, 0.3, 31)
    width = 3.0 if k else 1 + 2 * max(abs(v.v) for v in spaceform_striction_v(spec, u, 0))
    # straight rulings make RK4 exact in flat space, so a coarse step loses nothing there
    res = find_striction_numeric(spec, u, (-width, width), n_coarse=25, step=1e-3 if k else 2e-2)
    br = max(res.branches, key=lambda b: len(b.u))
    assert len(br.u) == u.size
    rb = rebase_on_branch(spec, br)
    assert rb.frame_defined.all()
    # the new base runs along the striction curve: phi vanishes, and nabla_{s'} Z is normal to the surface
    assert np.max(np.abs(rb.phi)) < 1e-5
    assert np.max(rb.tangential) < 1e-5


def test_unit_ruling_required():
    spec = helicoid_spec()
    raw = RuledSurfaceSpec(spec.metric, spec.alpha, spec.ruling, normalize_ruling=False)
    with pytest.raises(HypothesisViolated):
        find_striction_numeric(raw, [0.0], (-1, 1))
