"""Rebuild a ruled surface from prescribed Sannia invariants.

The state is the curve point and the three frame vectors (12 numbers).
``alpha'`` is assembled from the prescribed spherical angles and the frame
is moved by the prescribed rotation coefficients minus the connection
term.  Orthonormality is never re-imposed; its drift is reported instead.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from . import _kernels
from .errors import LeftChartDomain, NonPositiveKappa1
from .geodesic import DEFAULT_STEP, integrate
from .manifold import connection, gamma_contract, inner, metric_cross
from .ruled_surface import RuledSurfaceSpec
from .sannia import SanniaFrame

log = logging.getLogger(__name__)

FRAME_TOL = 1e-10


def _as_callable(f):
    if callable(f):
        return f
    c = float(f)
    return lambda u: np.full(np.shape(u), c)


@dataclass
class InvariantPrescription:
    """Invariants as functions of ``u`` plus the initial point and frame.

    ``kappa0`` is fixed to 1; the rulings are unit.
    """

    u0: float
    kappa1: object
    kappa2: object
    theta: object
    phi: object
    p0: np.ndarray
    initial_frame: SanniaFrame

    def __post_init__(self):
        self.kappa1, self.kappa2, self.theta, self.phi = map(
            _as_callable, (self.kappa1, self.kappa2, self.theta, self.phi))
        self.p0 = np.asarray(self.p0, dtype=float)

    def validate(self, m):
        m.check_point(self.p0)
        g = m.metric(self.p0)
        E = np.stack([self.initial_frame.X1, self.initial_frame.X2, self.initial_frame.X3], axis=-1)
        err = np.max(np.abs(E.T @ g @ E - np.eye(3)))
        if err > FRAME_TOL:
            raise ValueError(f"initial frame is not orthonormal (error {err:.3g})")
        if np.linalg.det(E) <= 0:
            raise ValueError("initial frame is negatively oriented")
        if not float(np.asarray(self.kappa1(np.asarray(self.u0)))) > 0:
            raise NonPositiveKappa1(f"kappa1(u0) <= 0 at u0 = {self.u0:g}")


def orthonormal_frame(g, a, b):
    """Positive g-orthonormal frame with ``X1 ~ a`` and ``X2`` in span(a, b)."""
    X1 = a / math.sqrt(inner(g, a, a))
    w = b - inner(g, b, X1) * X1
    X2 = w / math.sqrt(inner(g, w, w))
    return SanniaFrame(X1, X2, metric_cross(g, X1, X2), g=g)


def prescription_from_table(inv, p0, initial_frame, u0=None):
    """Prescription interpolating tabulated invariants with cubic splines.

    NaN samples of ``theta`` (undefined angle) are filled by interpolating
    the finite neighbours, or set to 0 when no sample is finite.
    """
    u = np.asarray(inv.u, dtype=float)
    if np.any(np.abs(np.asarray(inv.kappa0) - 1) > 1e-6):
        log.warning("kappa0 differs from 1 in the table; reconstruction assumes unit rulings")
    theta = np.asarray(inv.theta, dtype=float).copy()
    bad = ~np.isfinite(theta)
    if bad.all():
        theta[:] = 0.0
    elif bad.any():
        theta[bad] = np.interp(u[bad], u[~bad], theta[~bad])
    splines = [CubicSpline(u, np.asarray(c, dtype=float)) for c in (inv.kappa1, inv.kappa2, theta, inv.phi)]
    return InvariantPrescription(u0=float(u[0] if u0 is None else u0), kappa1=splines[0], kappa2=splines[1],
                                 theta=splines[2], phi=splines[3], p0=p0, initial_frame=initial_frame)


def _scalar(v):
    return float(np.ravel(v)[0])


def frame_rhs(m, presc):
    """Right-hand side of the curve-and-frame system."""

    def rhs(u, y):
        u = _scalar(u)
        x, X1, X2, X3 = y[:, :3], y[:, 3:6], y[:, 6:9], y[:, 9:12]
        k1 = _scalar(presc.kappa1(u))
        if not k1 > 0:
            raise NonPositiveKappa1(f"kappa1 <= 0 at u = {u:g}")
        k2 = _scalar(presc.kappa2(u))
        th, ph = _scalar(presc.theta(u)), _scalar(presc.phi(u))
        T = math.cos(ph) * math.cos(th) * X1 + math.sin(ph) * X2 + math.cos(ph) * math.sin(th) * X3
        if _kernels.AVAILABLE:
            G = _kernels.gamma_apply(m.metric(x), m.metric_derivatives(x), T, y[:, 3:12].reshape(-1, 3, 3))
            G1, G2, G3 = G[:, 0], G[:, 1], G[:, 2]
        else:
            _, _, gamma = connection(m, x)
            G1, G2, G3 = (gamma_contract(gamma, T, X) for X in (X1, X2, X3))
        return np.concatenate([T, k1 * X2 - G1, -k1 * X1 + k2 * X3 - G2, -k2 * X2 - G3], axis=1)

    return rhs


@dataclass
class ReconstructedSurface:
    metric: object
    u: np.ndarray
    alpha: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    X3: np.ndarray
    alpha_prime: np.ndarray
    X1_prime: np.ndarray
    exited: bool = False
    exit_param: float = math.nan

    @property
    def frames(self):
        return SanniaFrame(self.X1, self.X2, self.X3, point=self.alpha, g=self.metric.metric(self.alpha))

    def spec(self, name="reconstructed"):
        """Ruled surface through the samples, Hermite-interpolated in ``u``.

        Values and first derivatives are exact at the nodes, so invariants
        extracted with the node spacing as difference step only see the
        integration error.
        """
        if self.u.size < 2:
            raise ValueError("need at least two samples to build a surface")
        a = CubicHermiteSpline(self.u, self.alpha, self.alpha_prime, axis=0)
        z = CubicHermiteSpline(self.u, self.X1, self.X1_prime, axis=0)
        da, dz = a.derivative(), z.derivative()
        return RuledSurfaceSpec(self.metric, a, z, alpha_prime=da, ruling_prime=dz,
                                u_domain=(self.u[0], self.u[-1]), normalize_ruling=True, name=name)

    def to_rows(self):
        return np.column_stack([self.u, self.alpha, self.X1, self.X2, self.X3])


RECON_HEADER = ["u", "x", "y", "z", "X1_0", "X1_1", "X1_2", "X2_0", "X2_1", "X2_2", "X3_0", "X3_1", "X3_2"]


def _grid(u0, u1, step):
    n = max(1, math.ceil(abs(u1 - u0) / step - 1e-9))
    return u0 + (u1 - u0) * np.arange(1, n + 1) / n


def reconstruct(m, presc, u_range, step=DEFAULT_STEP):
    """Integrate the curve-and-frame system over ``u_range``.

    ``u_range = (a, b)`` must contain ``presc.u0``.  Samples are spaced by
    at most ``step``.  If the curve leaves the chart the result covers the
    achieved interval and ``exited`` is set.
    """
    a, b = map(float, u_range)
    u0 = presc.u0
    if not a <= u0 <= b:
        raise ValueError("u_range must contain u0")
    presc.validate(m)
    f = presc.initial_frame
    y0 = np.concatenate([presc.p0, f.X1, f.X2, f.X3])[None]
    rhs = frame_rhs(m, presc)
    us, ys = [np.array([u0])], [y0]
    exited, exit_param = False, math.nan
    for end in (b, a):
        if end == u0:
            continue
        grid = _grid(u0, end, step)
        tr = integrate(rhs, y0, u0, grid, step, m.inside)
        keep = tr.valid[0]
        if tr.exited[0]:
            exited, exit_param = True, float(tr.exit_param[0])
        seg_u, seg_y = grid[keep], tr.y[0, keep]
        if end < u0:
            us.insert(0, seg_u[::-1])
            ys.insert(0, seg_y[::-1])
        else:
            us.append(seg_u)
            ys.append(seg_y)
    u = np.concatenate(us)
    y = np.concatenate(ys)
    d = np.concatenate([rhs(s, row[None]) for s, row in zip(u, y)]) if u.size else y
    return ReconstructedSurface(metric=m, u=u, alpha=y[:, :3], X1=y[:, 3:6], X2=y[:, 6:9], X3=y[:, 9:12],
                                alpha_prime=d[:, :3], X1_prime=d[:, 3:6], exited=exited, exit_param=exit_param)


def orthonormality_drift(rec):
    """Largest deviation of the frame Gram matrix from the identity."""
    return float(np.max(rec.frames.orthonormality_error()))


def speed_error(rec):
    g = rec.metric.metric(rec.alpha)
    return float(np.max(np.abs(np.sqrt(inner(g, rec.alpha_prime, rec.alpha_prime)) - 1)))


def require_inside(rec):
    if rec.exited:
        raise LeftChartDomain("reconstructed curve left the chart", exit_param=rec.exit_param)
