import numpy as np
from hypothesis import given, settings, strategies as st

from ruledgeom import curvature_grid, euclidean, hyperbolic_halfspace, sphere, warped
from ruledgeom.manifold import inner
from ruledgeom.ruled_surface import ruling_sweep
from ruledgeom.verification import random_family

from conftest import sin_profile

METRICS = {
    "euclidean": (euclidean, lambda r: r.uniform(-1, 1, (1, 3)), 1.0),
    "sphere": (lambda: sphere(1.0), lambda r: r.uniform(-0.03, 0.03, (1, 3)), 0.5),
    "halfspace": (lambda: hyperbolic_halfspace(-1.0), lambda r: np.array([[*r.uniform(-1, 1, 2), 1.0]]), 1.0),
    "warped": (lambda: warped(sin_profile(2.0, 0.5)), lambda r: r.uniform(-1, 1, (1, 3)), 1.0),
}

surfaces = st.tuples(st.sampled_from(sorted(METRICS)), st.integers(0, 2**32 - 1))
V = np.linspace(-0.6, 0.6, 7)


def _spec(kind, seed):
    make, points, scale = METRICS[kind]
    rng = np.random.default_rng(seed)
    return random_family(rng, make(), points(rng), scale)


@settings(max_examples=12, deadline=None)
@given(surfaces)
def test_extrinsic_curvature_is_nonpositive(case):
    rep = curvature_grid(_spec(*case), np.array([-0.2, 0.0, 0.2]), V)
    k = rep.K_ext[rep.rank2]
    assert np.all(k <= 1e-9)


@settings(max_examples=12, deadline=None)
@given(surfaces)
def test_ruling_angle_is_constant(case):
    spec = _spec(*case)
    jets = ruling_sweep(spec, np.array([-0.2, 0.2]), V)
    g = spec.metric.metric(jets.point)
    c = inner(g, jets.Xu, jets.Xv)
    assert np.all(np.ptp(c, axis=1) < 1e-9 * np.maximum(1, np.abs(c).max(axis=1)))
