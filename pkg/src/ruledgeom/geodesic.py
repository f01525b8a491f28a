"""Geodesics, parallel transport and Jacobi fields by fixed-step RK4.

Every integrator here works on a batch of independent trajectories: the
state is an ``(N, d)`` array whose first three columns are the chart
position.  Curvature is evaluated at the current position of each
stage; nothing is cached.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import LeftChartDomain
from .manifold import connection, curvature_contract, curvature_data, gamma_contract

DEFAULT_STEP = 1e-3
EXIT_TOL = 1e-10

# compiled right-hand sides; flip off to force the numpy reference path
USE_KERNELS = _kernels.AVAILABLE


def rk4_step(rhs, t, y, h):
    """One classical Runge-Kutta step; ``h`` may be a scalar or an ``(N, 1)`` array."""
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + h / 2 * k1)
    k3 = rhs(t + h / 2, y + h / 2 * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class Trajectory:
    """Samples of a batch of trajectories.

    ``y[n, m]`` is the state of trajectory ``n`` at parameter ``t[m]``;
    ``valid[n, m]`` is False once trajectory ``n`` has left the chart, in
    which case ``exit_param[n]`` holds the bisected exit parameter.
    """

    t: np.ndarray
    y: np.ndarray
    valid: np.ndarray
    exit_param: np.ndarray

    @property
    def exited(self):
        return np.isfinite(self.exit_param)


def integrate(rhs, y0, t0, targets, step, inside, exit_tol=EXIT_TOL):
    """Integrate ``y' = rhs(t, y)`` from ``t0`` through the sorted ``targets``.

    Targets must all lie on the same side of ``t0``.  Each interval
    between consecutive targets is split into equal sub-steps no longer
    than ``step``.  Trajectories that leave the chart are frozen at their
    last valid state and their exit parameter is bisected to ``exit_tol``.
    """
    y = np.array(y0, dtype=float, copy=True)
    if y.ndim == 1:
        y = y[None, :]
    targets = np.asarray(targets, dtype=float)
    n_traj, n_t = y.shape[0], targets.size
    direction = 1.0
    if n_t and np.any(targets < t0):
        direction = -1.0
        if np.any(targets > t0):
            raise ValueError("targets must lie on one side of t0")
    if np.any(np.diff(targets) * direction < 0):
        raise ValueError("targets must be ordered away from t0")

    out = np.full((n_traj, n_t) + y.shape[1:], np.nan)
    valid = np.zeros((n_traj, n_t), dtype=bool)
    exit_param = np.full(n_traj, np.nan)
    active = np.asarray(inside(y[:, :3]), dtype=bool) & np.all(np.isfinite(y), axis=1)
    exit_param[~active] = t0

    t = float(t0)
    for m, target in enumerate(targets):
        span = target - t
        n_sub = max(1, math.ceil(abs(span) / step - 1e-9)) if span != 0 else 0
        h = span / n_sub if n_sub else 0.0
        for _ in range(n_sub):
            if not active.any():
                break
            y_new = rk4_step(rhs, t, y, h)
            ok = np.asarray(inside(y_new[:, :3]), dtype=bool) & np.all(np.isfinite(y_new), axis=1)
            left = active & ~ok
            if left.any():
                exit_param[left] = t + direction * _bisect_exit(rhs, t, y, h, left, inside, exit_tol)
            active = active & ok
            y = np.where(active[:, None], y_new, y)
            t += h
        t = float(target)
        out[active, m] = y[active]
        valid[:, m] = active
    return Trajectory(t=targets, y=out, valid=valid, exit_param=exit_param)


def _bisect_exit(rhs, t, y, h, rows, inside, tol):
    """Distance from ``t`` at which each row in ``rows`` leaves the chart.

    The whole batch is stepped so that row-coupled right-hand sides keep
    their shape; rows outside ``rows`` take zero-length steps.
    """
    lo = np.zeros(y.shape[0])
    hi = np.where(rows, abs(h), 0.0)
    sign = math.copysign(1.0, h)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        y_mid = rk4_step(rhs, t, y, sign * mid[:, None])
        ok = np.asarray(inside(y_mid[:, :3]), dtype=bool) & np.all(np.isfinite(y_mid), axis=1)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo[rows]


def integrate_two_sided(rhs, y0, t0, samples, step, inside):
    """Like :func:`integrate` but ``samples`` may straddle ``t0``.

    ``rhs`` must be autonomous: both directions are integrated as one
    batch in the distance ``tau = |t - t0|``, with the backward copies
    running the negated field.
    """
    samples = np.asarray(samples, dtype=float)
    y0 = np.atleast_2d(np.asarray(y0, dtype=float))
    n, d = y0.shape
    fwd, bwd = samples >= t0, samples < t0
    if not bwd.any() or not fwd.any():
        order = np.argsort(np.abs(samples - t0), kind="stable")
        tr = integrate(rhs, y0, t0, samples[order], step, inside)
        inv = np.empty_like(order)
        inv[order] = np.arange(order.size)
        return Trajectory(t=samples, y=tr.y[:, inv], valid=tr.valid[:, inv], exit_param=tr.exit_param)

    sign = np.concatenate([np.ones(n), -np.ones(n)])[:, None]

    def merged(t, y):
        return sign * rhs(t, y)

    tau = np.unique(np.abs(samples - t0))
    tr = integrate(merged, np.concatenate([y0, y0]), 0.0, tau, step, inside)
    col = np.searchsorted(tau, np.abs(samples - t0))
    y = np.where(fwd[None, :, None], tr.y[:n, col], tr.y[n:, col])
    valid = np.where(fwd[None, :], tr.valid[:n, col], tr.valid[n:, col])
    ef, eb = tr.exit_param[:n], tr.exit_param[n:]
    # keep the exit closest to the base when both directions leave
    exit_param = np.where(np.isfinite(eb) & ~(ef <= eb), t0 - eb, t0 + ef)
    return Trajectory(t=samples, y=y, valid=valid, exit_param=exit_param)


# ---------------------------------------------------------------------------
# right-hand sides


def geodesic_rhs(m):
    if USE_KERNELS:
        def fast(t, y):
            return _kernels.geodesic_rhs_kernel(m.metric(y[:, :3]), m.metric_derivatives(y[:, :3]), y)
        return fast

    def rhs(t, y):
        x, xd = y[:, :3], y[:, 3:6]
        _, _, gamma = connection(m, x)
        return np.concatenate([xd, -gamma_contract(gamma, xd, xd)], axis=1)

    return rhs


def transport_rhs(m):
    if USE_KERNELS:
        def fast(t, y):
            x = y[:, :3]
            return _kernels.geodesic_rhs_kernel(m.metric(x), m.metric_derivatives(x), y, True)
        return fast

    def rhs(t, y):
        x, xd, w = y[:, :3], y[:, 3:6], y[:, 6:9]
        _, _, gamma = connection(m, x)
        return np.concatenate([xd, -gamma_contract(gamma, xd, xd), -gamma_contract(gamma, xd, w)], axis=1)

    return rhs


def jacobi_rhs(m):
    """12-dimensional system in (x, x', J, DJ) with ``DJ = nabla_{x'} J``."""
    if USE_KERNELS:
        def fast(t, y):
            g, dg, d2g = m.metric_jet(y[:, :3])
            return _kernels.jacobi_rhs_kernel(g, dg, d2g, y)
        return fast

    def rhs(t, y):
        x, xd, J, DJ = y[:, :3], y[:, 3:6], y[:, 6:9], y[:, 9:12]
        _, gamma, riemann = curvature_data(m, x)
        rjv = curvature_contract(riemann, xd, J, xd)
        return np.concatenate([
            xd,
            -gamma_contract(gamma, xd, xd),
            DJ - gamma_contract(gamma, xd, J),
            -rjv - gamma_contract(gamma, xd, DJ),
        ], axis=1)

    return rhs


# ---------------------------------------------------------------------------
# public operations


@dataclass
class GeodesicPath:
    v: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    step: float
    exited: bool = False
    exit_param: float = math.nan


@dataclass
class JacobiPath:
    v: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    J: np.ndarray
    DJ: np.ndarray
    exited: bool = False
    exit_param: float = math.nan


def _sample_grid(v_max, step):
    n = math.floor(abs(v_max) / step + 1e-9)
    v = math.copysign(1.0, v_max) * step * np.arange(n + 1)
    if abs(abs(v_max) - n * step) > 1e-12:
        v = np.append(v, v_max)
    return v


def exp_map(m, p, Z, v_max, step=DEFAULT_STEP):
    """Sample the geodesic ``v -> exp_p(v Z)`` at multiples of ``step`` up to ``v_max``.

    If the geodesic leaves the chart the path is truncated at the last
    valid sample and ``exited``/``exit_param`` are set.
    """
    p = m.check_point(p)
    v = _sample_grid(v_max, step)
    y0 = np.concatenate([p, np.asarray(Z, dtype=float)])
    tr = integrate(geodesic_rhs(m), y0, 0.0, v, step, m.inside)
    keep = tr.valid[0]
    y = tr.y[0, keep]
    return GeodesicPath(v=v[keep], x=y[:, :3], xdot=y[:, 3:6], step=step,
                        exited=bool(tr.exited[0]), exit_param=float(tr.exit_param[0]))


def _resample(path, m, rhs, extra):
    y0 = np.concatenate([path.x[0], path.xdot[0], *extra])
    tr = integrate(rhs, y0, path.v[0], path.v, path.step, m.inside)
    if tr.exited[0]:
        raise LeftChartDomain("trajectory left the chart", exit_param=float(tr.exit_param[0]))
    return tr.y[0]


def parallel_transport(m, path, w0, return_all=False):
    """Transport ``w0`` from the start of ``path`` to its end."""
    y = _resample(path, m, transport_rhs(m), [np.asarray(w0, dtype=float)])
    return y[:, 6:9] if return_all else y[-1, 6:9]


def integrate_jacobi(m, path, J0, DJ0):
    """Jacobi field along ``path`` with initial value ``J0`` and covariant derivative ``DJ0``."""
    y = _resample(path, m, jacobi_rhs(m), [np.asarray(J0, dtype=float), np.asarray(DJ0, dtype=float)])
    return JacobiPath(v=path.v, x=y[:, :3], xdot=y[:, 3:6], J=y[:, 6:9], DJ=y[:, 9:12],
                      exited=path.exited, exit_param=path.exit_param)


def decompose_jacobi(xdot, J, alpha_prime_norm, sigma_p):
    """Split a Jacobi field on a unit-speed ruling into tangential and normal parts.

    Returns ``(coefficient, J_perp)`` with ``J = coefficient * x' + J_perp``
    where the coefficient is ``|alpha'| cos(sigma_p)`` on every sample.
    """
    coef = alpha_prime_norm * math.cos(sigma_p)
    J_perp = np.asarray(J, dtype=float) - coef * np.asarray(xdot, dtype=float)
    return coef, J_perp


@dataclass
class RulingSweep:
    """Jacobi data on a batch of rulings sampled at common parameters ``v``.

    Arrays are indexed ``[ruling, sample, component]``.
    """

    v: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    J: np.ndarray
    DJ: np.ndarray
    valid: np.ndarray
    exit_param: np.ndarray


def integrate_rulings(m, x0, v0, J0, DJ0, v_samples, step=DEFAULT_STEP):
    """Integrate geodesic + Jacobi data for every ruling in the batch."""
    y0 = np.concatenate([np.atleast_2d(a) for a in (x0, v0, J0, DJ0)], axis=1)
    tr = integrate_two_sided(jacobi_rhs(m), y0, 0.0, v_samples, step, m.inside)
    y = tr.y
    return RulingSweep(v=np.asarray(v_samples, dtype=float), x=y[..., :3], xdot=y[..., 3:6],
                       J=y[..., 6:9], DJ=y[..., 9:12], valid=tr.valid, exit_param=tr.exit_param)


def state_from_sweep(sw):
    return np.concatenate([sw.x, sw.xdot, sw.J, sw.DJ], axis=-1)
