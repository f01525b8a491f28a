import math

import numpy as np
import pytest

from ruledgeom import RuledSurfaceSpec, TrigPoly, euclidean, hyperbolic_halfspace, sphere

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def helicoid_spec(rate=1.0):
    """Axis as base curve, horizontal rulings turning at ``rate``."""
    alpha = lambda u: np.stack([np.zeros_like(u), np.zeros_like(u), u], axis=-1)
    dalpha = lambda u: np.stack([np.zeros_like(u), np.zeros_like(u), np.ones_like(u)], axis=-1)
    Z = lambda u: np.stack([np.cos(rate * u), np.sin(rate * u), np.zeros_like(u)], axis=-1)
    dZ = lambda u: rate * np.stack([-np.sin(rate * u), np.cos(rate * u), np.zeros_like(u)], axis=-1)
    return RuledSurfaceSpec(euclidean(), alpha, Z, alpha_prime=dalpha, ruling_prime=dZ, name="helicoid")


def hyperbolic_helicoid(rate=2.0):
    """Vertical geodesic of the half-space with horizontal rulings turning at ``rate``.

    In H^3(-1), ``nabla_{alpha'} Z`` has norm ``|rate|`` and is orthogonal
    to both ``alpha'`` and ``Z``.
    """
    alpha = lambda u: np.stack([np.zeros_like(u), np.zeros_like(u), np.exp(u)], axis=-1)
    Z = lambda u: np.exp(u)[..., None] * np.stack([np.cos(rate * u), np.sin(rate * u), np.zeros_like(u)], axis=-1)
    return RuledSurfaceSpec(hyperbolic_halfspace(-1.0), alpha, Z, alpha_prime=alpha, name="h3-helicoid")


def circle_spec(m, center, radius, ruling):
    c = np.asarray(center, dtype=float)

    def alpha(u):
        return c + radius * np.stack([np.cos(u), np.sin(u), np.zeros_like(u)], axis=-1)

    def dalpha(u):
        return radius * np.stack([-np.sin(u), np.cos(u), np.zeros_like(u)], axis=-1)

    return RuledSurfaceSpec(m, alpha, ruling, alpha_prime=dalpha)


def sin_profile(c0=2.0, amp=1.0):
    return TrigPoly(poly=(c0,), trig=((amp, 1.0, 0.0),))


@pytest.fixture
def s3():
    return sphere(1.0)


@pytest.fixture
def h3():
    return hyperbolic_halfspace(-1.0)


def unit(g, v):
    return v / math.sqrt(float(v @ g @ v))
