"""Closed-form geodesics and Jacobi-field norms in the space-form charts.

These are independent of the RK4 integrators and serve as test oracles.
Results are expressed in the same chart coordinates as the numeric side.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartSingularity


@dataclass(frozen=True)
class SpaceFormTag:
    k: float
    chart: str = None

    def __post_init__(self):
        expected = "euclidean" if self.k == 0 else ("stereographic" if self.k > 0 else "halfspace")
        if self.chart is None:
            object.__setattr__(self, "chart", expected)
        elif self.chart != expected:
            raise ValueError(f"chart {self.chart!r} does not match curvature {self.k}")


def _conformal_factor(tag, p):
    if tag.chart == "stereographic":
        return 2.0 / (1.0 + tag.k * float(p @ p))
    if tag.chart == "halfspace":
        return 1.0 / (math.sqrt(-tag.k) * p[2])
    return 1.0


def oracle_geodesic(tag, p, Z, v):
    """Position and velocity at parameter ``v`` of the geodesic with ``x(0)=p, x'(0)=Z``."""
    p = np.asarray(p, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if tag.chart == "euclidean":
        return p + v * Z, Z.copy()
    if tag.chart == "stereographic":
        return _sphere_geodesic(tag.k, p, Z, v)
    return _halfspace_geodesic(tag.k, p, Z, v)


def _sphere_geodesic(k, p, Z, v):
    # unit sphere picture: y = sqrt(k) x, Q(y) = (2y, |y|^2 - 1) / (|y|^2 + 1)
    rk = math.sqrt(k)
    y, dy = rk * p, rk * Z
    q = 1.0 + y @ y
    P0 = np.append(2 * y, y @ y - 1) / q
    jac = np.zeros((4, 3))
    jac[:3] = 2 * np.eye(3) / q - 4 * np.outer(y, y) / q**2
    jac[3] = 4 * y / q**2
    T0 = jac @ dy
    speed = float(np.linalg.norm(T0))
    if speed == 0:
        return p.copy(), Z.copy()
    s = speed * v
    P = math.cos(s) * P0 + math.sin(s) * T0 / speed
    dP = speed * (-math.sin(s) * P0 + math.cos(s) * T0 / speed)
    den = 1.0 - P[3]
    if den < 1e-12:
        raise ChartSingularity("geodesic passes through the stereographic pole")
    y_out = P[:3] / den
    dy_out = dP[:3] / den + P[:3] * dP[3] / den**2
    return y_out / rk, dy_out / rk


def _halfspace_geodesic(k, p, Z, v):
    lam = _conformal_factor(SpaceFormTag(k), p)
    speed = math.sqrt(-k) * lam * float(np.linalg.norm(Z))  # speed in the k=-1 model
    if speed == 0:
        return p.copy(), Z.copy()
    z0 = p[2]
    hv = Z[:2]
    # unit-speed direction in the k=-1 model: a^2 + b^2 = z0^2
    a =float(np.linalg.norm(hv)) / float(np.linalg.norm(Z)) * z0
    b = Z[2] / float(np.linalg.norm(Z)) * z0
    tau = speed * v
    if a < 1e-14 * z0:
        z = z0 * math.exp(math.copysign(1.0, b) * tau)
        dz = math.copysign(1.0, b) * z * speed
        return np.array([p[0], p[1], z]), np.array([0.0, 0.0, dz])
    e_h = hv / np.linalg.norm(hv)
    tau0 = math.atanh(-b / z0)
    r = z0 * z0 / a
    c = -r * math.tanh(tau0)
    s = tau + tau0
    u = c + r * math.tanh(s)
    z = r / math.cosh(s)
    du = r / math.cosh(s) ** 2 * speed
    dz = -r * math.tanh(s) / math.cosh(s) * speed
    x = np.array([p[0] + u * e_h[0], p[1] + u * e_h[1], z])
    return x, np.array([du * e_h[0], du * e_h[1], dz])


def _fundamental(k, v):
    """cos/sin-type solutions of ``f'' + k f = 0`` with ``f(0)=1, f'(0)=0`` and ``f(0)=0, f'(0)=1``."""
    if k > 0:
        r = math.sqrt(k)
        return math.cos(r * v), math.sin(r * v) / r
    if k < 0:
        r = math.sqrt(-k)
        return math.cosh(r * v), math.sinh(r * v) / r
    return 1.0, v


def oracle_jacobi_norm(tag, a, b, w_norm, v, dw_norm=0.0, w_dot_dw=0.0):
    """Norm of a Jacobi field along a unit-speed geodesic in a space form.

    The field is ``(a + b v) gamma' + J_perp`` where ``J_perp(0)`` has norm
    ``w_norm``, ``nabla J_perp(0)`` has norm ``dw_norm`` and the two have
    inner product ``w_dot_dw``.
    """
    c, s = _fundamental(tag.k, v)
    perp_sq = c * c * w_norm**2 + 2 * c * s * w_dot_dw + s * s * dw_norm**2
    return math.sqrt((a + b * v) ** 2 + max(perp_sq, 0.0))
