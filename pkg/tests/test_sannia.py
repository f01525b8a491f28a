import math

import numpy as np
import pytest

from ruledgeom import (NotGeneralPosition, RuledSurfaceSpec, build_spec, curvature_grid, euclidean,
                       hyperbolic_halfspace, is_general_position, load_scenario, sannia_frame_at,
                       sannia_invariants, sphere, warped)
from ruledgeom.sannia import frame_derivative_residual, read_invariants_csv, write_invariants_csv
from ruledgeom.verification import random_family

from conftest import helicoid_spec, sin_profile


def test_helicoid_invariants():
    spec = helicoid_spec()
    u = np.linspace(0, 3, 7)
    inv = sannia_invariants(spec, u)
    assert np.allclose(inv.kappa0, 1) and np.allclose(inv.kappa1, 1)
    assert np.allclose(inv.kappa2, 0, atol=1e-9)
    assert np.allclose(inv.theta, math.pi / 2) and np.allclose(inv.phi, 0)
    assert np.allclose(inv.distribution_parameter(), 1.0)
    f = sannia_frame_at(spec, 0.0)
    assert np.allclose(f.matrix(), np.eye(3))


def test_frame_is_orthonormal_and_positive():
    spec = build_spec(load_scenario("example3"))
    inv = sannia_invariants(spec, np.linspace(0.2, 5.0, 9))
    assert np.max(inv.frame.orthonormality_error()) < 1e-12
    assert np.all(np.linalg.det(inv.frame.matrix()) > 0)
    assert np.max(frame_derivative_residual(spec, inv)) < 1e-8


@pytest.mark.parametrize("kind", ["sphere", "halfspace", "warped"])
def test_distribution_parameter_two_ways(kind, rng):
    # invariants at v = 0 versus the surface jets, for the raw ruling and for its unit rescaling
    if kind == "sphere":
        m, pts, scale = sphere(1.0), rng.uniform(-0.05, 0.05, (4, 3)), 0.5
    elif kind == "halfspace":
        m, pts, scale = hyperbolic_halfspace(-1.0), np.column_stack([rng.uniform(-1, 1, (4, 2)), np.ones(4)]), 1.0
    else:
        m, pts, scale = warped(sin_profile(2.0, 0.5)), rng.uniform(-1, 1, (4, 3)), 1.0
    unit = random_family(rng, m, pts, scale)
    raw = RuledSurfaceSpec(m, unit.alpha, unit.ruling, alpha_prime=unit.alpha_prime,
                           ruling_prime=unit.ruling_prime, normalize_ruling=False)
    u = np.arange(4.0) + 0.1
    inv = sannia_invariants(raw, u)
    assert not np.allclose(inv.kappa0, 1.0)
    lam_raw = curvature_grid(raw, u, [0.0]).lam[:, 0]
    assert np.allclose(inv.distribution_parameter(), lam_raw, rtol=1e-7, atol=1e-9)
    # the unit ruling has kappa0 = 1 and a constant length, leaving cos(phi) sin(theta) / kappa1 per unit speed
    lam_unit = curvature_grid(unit, u, [0.0]).lam[:, 0]
    reduced = inv.alpha_speed * np.cos(inv.phi) * np.sin(inv.theta) / inv.kappa1
    assert np.allclose(reduced, lam_unit, rtol=1e-7, atol=1e-9)


def test_euclidean_motion_invariance(rng):
    spec = random_family(rng, euclidean(), rng.uniform(-1, 1, (1, 3)))
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    Q *= np.sign(np.linalg.det(Q))
    t = rng.normal(size=3)
    moved = RuledSurfaceSpec(euclidean(), lambda u: spec.alpha(u) @ Q.T + t, lambda u: spec.ruling(u) @ Q.T,
                             alpha_prime=lambda u: spec.alpha_prime(u) @ Q.T,
                             ruling_prime=lambda u: spec.ruling_prime(u) @ Q.T)
    u = np.linspace(-0.3, 0.3, 5)
    a, b = sannia_invariants(spec, u), sannia_invariants(moved, u)
    for name in ("kappa0", "kappa1", "kappa2", "theta", "phi"):
        assert np.allclose(getattr(a, name), getattr(b, name), atol=1e-8), name


def test_halfspace_dilation_invariance(rng):
    m = hyperbolic_halfspace(-1.0)
    spec = random_family(rng, m, np.array([[0.1, -0.2, 1.0]]))
    c = 2.5
    scaled = RuledSurfaceSpec(m, lambda u: c * spec.alpha(u), lambda u: c * spec.ruling(u),
                              alpha_prime=lambda u: c * spec.alpha_prime(u),
                              ruling_prime=lambda u: c * spec.ruling_prime(u))
    u = np.linspace(-0.3, 0.3, 5)
    a, b = sannia_invariants(spec, u), sannia_invariants(scaled, u)
    for name in ("kappa1", "kappa2", "theta", "phi"):
        assert np.allclose(getattr(a, name), getattr(b, name), atol=1e-8), name


def test_cylinder_is_not_in_general_position():
    spec = build_spec(load_scenario("cylinder"))
    ok, diag = is_general_position(spec, 0.5)
    assert not ok and diag["kappa1"] < 1e-7
    with pytest.raises(NotGeneralPosition):
        sannia_invariants(spec, [0.5])


def test_theta_undefined_when_tangent_is_along_x2():
    inv = sannia_invariants(build_spec(load_scenario("example1")), np.linspace(0, 3, 4))
    assert np.allclose(inv.phi, math.pi / 2)
    assert np.all(np.isnan(inv.theta)) and inv.angle_degenerate.all()
    assert np.allclose(inv.kappa1, 1.0)


def test_csv_round_trip(tmp_path):
    inv = sannia_invariants(build_spec(load_scenario("example1")), np.linspace(0, 3, 4))
    path = tmp_path / "inv.csv"
    write_invariants_csv(path, inv)
    back = read_invariants_csv(path)
    assert np.array_equal(back.kappa1, inv.kappa1)
    assert np.all(np.isnan(back.theta))
    assert path.read_text().splitlines()[0] == "u,kappa0,kappa1,kappa2,theta,phi"


def test_arc_length_resampling_recovers_the_helicoid():
    # helicoid with the distorted parameter t -> t + 0.3 t^2
    from ruledgeom.ruled_surface import arc_length_spec

    phi = lambda t: t + 0.3 * t * t
    dphi = lambda t: 1 + 0.6 * t
    alpha = lambda t: np.stack([0 * t, 0 * t, phi(t)], -1)
    dalpha = lambda t: np.stack([0 * t, 0 * t, dphi(t)], -1)
    Z = lambda t: np.stack([np.cos(phi(t)), np.sin(phi(t)), 0 * t], -1)
    dZ = lambda t: dphi(t)[..., None] * np.stack([-np.sin(phi(t)), np.cos(phi(t)), 0 * t], -1)
    spec = RuledSurfaceSpec(euclidean(), alpha, Z, alpha_prime=dalpha, ruling_prime=dZ)
    raw = sannia_invariants(spec, [0.5])
    assert raw.kappa1[0] == pytest.approx(dphi(0.5))
    new, length = arc_length_spec(spec, (0.0, 1.5))
    assert length == pytest.approx(phi(1.5), abs=1e-10)
    s = np.linspace(0, length, 9)
    inv = sannia_invariants(new, s)
    assert np.allclose(inv.alpha_speed, 1, atol=1e-12)
    assert np.allclose(inv.kappa1, 1, atol=1e-9) and np.allclose(inv.kappa2, 0, atol=1e-7)
    assert np.allclose(inv.theta, math.pi / 2) and np.allclose(new.base(s).alpha[:, 2], s, atol=1e-10)
