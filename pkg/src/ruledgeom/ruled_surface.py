"""Ruled surfaces ``X(u, v) = exp_{alpha(u)}(v Z(u))`` and their curvatures.

``X_u`` is never differenced across rulings: it is the Jacobi field with
initial data ``(alpha', nabla_{alpha'} Z)`` integrated along each ruling
together with the geodesic itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpec, LeftChartDomain, RankDeficientPlane
from .geodesic import DEFAULT_STEP, integrate_rulings
from .manifold import (EPS_LIN, connection, curvature_data, gamma_contract, gram_determinant,
                       inner, lower_riemann)

EPS_REG = 1e-8
H_BASE = 1e-5


def _vectorized(f, u):
    """Evaluate a curve callback on an array of parameters, looping if it is scalar-only."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    try:
        out = np.asarray(f(u), dtype=float)
        if out.shape == (u.size, 3):
            return out
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(f(float(s)), dtype=float) for s in u]).reshape(u.size, 3)


@dataclass
class BaseData:
    """Everything about the base curve the rulings need, one row per ``u``."""

    u: np.ndarray
    alpha: np.ndarray
    alpha_prime: np.ndarray
    Z: np.ndarray
    Z_prime: np.ndarray
    W: np.ndarray  # nabla_{alpha'} Z
    g: np.ndarray


class RuledSurfaceSpec:
    """A base curve and a ruling field along it.

    Parameters
    ----------
    metric : ChartMetric
    alpha : callable
        ``alpha(u) -> (n, 3)`` chart points for an array ``u`` of shape ``(n,)``.
        Scalar-only callbacks are accepted and looped over.
    ruling : callable
        ``ruling(u) -> (n, 3)`` chart components of ``Z(u)`` at ``alpha(u)``.
    alpha_prime, ruling_prime : callable, optional
        Exact ``u``-derivatives.  Central differences with step ``h_fd``
        are used when omitted.
    u_domain : tuple of float
    normalize_ruling : bool
        Rescale ``Z`` to unit length; its derivative is adjusted exactly.
    """

    def __init__(self, metric, alpha, ruling, alpha_prime=None, ruling_prime=None,
                 u_domain=(-math.inf, math.inf), normalize_ruling=True, h_fd=H_BASE,
                 eps_reg=EPS_REG, name="custom"):
        self.metric = metric
        self.alpha = alpha
        self.ruling = ruling
        self.alpha_prime = alpha_prime
        self.ruling_prime = ruling_prime
        self.u_domain = (float(u_domain[0]), float(u_domain[1]))
        self.normalize_ruling = normalize_ruling
        self.h_fd = h_fd
        self.eps_reg = eps_reg
        self.name = name

    def _derivative(self, f, fprime, u):
        if fprime is not None:
            return _vectorized(fprime, u)
        h = self.h_fd
        return (_vectorized(f, u + h) - _vectorized(f, u - h)) / (2 * h)

    def base(self, u, normalize=None):
        """Base-curve data at the parameters ``u`` (array or scalar).

        ``normalize`` overrides the spec's ``normalize_ruling`` flag.
        """
        u = np.atleast_1d(np.asarray(u, dtype=float))
        lo, hi = self.u_domain
        if np.any((u < lo - 1e-12) | (u > hi + 1e-12)):
            raise ValueError(f"u outside the surface domain [{lo}, {hi}]")
        m = self.metric
        a = m.check_point(_vectorized(self.alpha, u))
        da = self._derivative(self.alpha, self.alpha_prime, u)
        Z = _vectorized(self.ruling, u)
        dZ = self._derivative(self.ruling, self.ruling_prime, u)
        g, dg = m.metric(a), m.metric_derivatives(a)
        na = np.sqrt(inner(g, da, da))
        nz = np.sqrt(inner(g, Z, Z))
        if np.any(na <= self.eps_reg):
            raise DegenerateSpec(f"base curve is singular at u = {u[np.argmin(na)]:g}")
        if np.any(nz <= self.eps_reg):
            raise DegenerateSpec(f"ruling field vanishes at u = {u[np.argmin(nz)]:g}")
        if self.normalize_ruling if normalize is None else normalize:
            # d/du |Z| = (dg(alpha')(Z, Z) + 2 g(Z, Z')) / (2 |Z|)
            dgZZ = np.einsum("...l,...lij,...i,...j->...", da, dg, Z, Z)
            dn = (dgZZ + 2 * inner(g, Z, dZ)) / (2 * nz)
            dZ = dZ / nz[:, None] - Z * (dn / nz**2)[:, None]
            Z = Z / nz[:, None]
        _, _, gamma = connection(m, a)
        W = dZ + gamma_contract(gamma, da, Z)
        return BaseData(u=u, alpha=a, alpha_prime=da, Z=Z, Z_prime=dZ, W=W, g=g)


@dataclass
class SurfaceJet:
    """First-order data of the surface at ``(u, v)``; arrays broadcast over a grid."""

    u: np.ndarray
    v: np.ndarray
    point: np.ndarray
    Xu: np.ndarray
    Xv: np.ndarray
    DXu: np.ndarray
    valid: np.ndarray
    rank2: np.ndarray
    exit_param: np.ndarray = None


def _spans_plane(gram, normalized, eps_reg):
    # the angle test alone would accept a rounding-level X_u
    return (normalized > EPS_LIN) & (np.sqrt(np.maximum(gram, 0.0)) > eps_reg)


def ruling_sweep(spec, u, v, step=DEFAULT_STEP, base=None):
    """Jets on the grid ``u x v``; arrays are indexed ``[i_u, i_v, ...]``.

    Points past a chart exit are NaN with ``valid`` False; the exit
    parameter of each ruling is kept in ``exit_param``.
    """
    b = spec.base(u) if base is None else base
    v = np.atleast_1d(np.asarray(v, dtype=float))
    sw = integrate_rulings(spec.metric, b.alpha, b.Z, b.alpha_prime, b.W, v, step)
    rank2 = np.zeros(sw.valid.shape, dtype=bool)
    if sw.valid.any():
        g = spec.metric.metric(sw.x[sw.valid])
        gram, normalized = gram_determinant(g, sw.J[sw.valid], sw.xdot[sw.valid])
        rank2[sw.valid] = _spans_plane(gram, normalized, spec.eps_reg)
    uu, vv = np.meshgrid(b.u, v, indexing="ij")
    return SurfaceJet(u=uu, v=vv, point=sw.x, Xu=sw.J, Xv=sw.xdot, DXu=sw.DJ,
                      valid=sw.valid, rank2=rank2, exit_param=sw.exit_param)


def evaluate_jet(spec, u, v, step=DEFAULT_STEP):
    """The jet at a single ``(u, v)``."""
    jet = ruling_sweep(spec, [u], [v], step)
    if not jet.valid[0, 0]:
        raise LeftChartDomain(f"ruling at u={u:g} leaves the chart before v={v:g}",
                              exit_param=float(jet.exit_param[0]))
    return SurfaceJet(u=float(u), v=float(v), point=jet.point[0, 0], Xu=jet.Xu[0, 0],
                      Xv=jet.Xv[0, 0], DXu=jet.DXu[0, 0], valid=True, rank2=bool(jet.rank2[0, 0]),
                      exit_param=float(jet.exit_param[0]))


@dataclass
class CurvatureReport:
    """Curvature data of the surface; ``lam`` is NaN where ``lam_defined`` is False."""

    K_ambient: np.ndarray
    K_ext: np.ndarray
    K_intrinsic: np.ndarray
    lam: np.ndarray
    lam_defined: np.ndarray
    sigma: np.ndarray
    h_uv: np.ndarray
    rank2: np.ndarray


def curvature_from_jets(m, point, Xu, Xv, DXu, eps_reg=EPS_REG):
    """Curvatures for flat arrays of jet data (all rows assumed valid)."""
    g, _, riemann = curvature_data(m, point)
    riem = lower_riemann(g, riemann)
    uu, vv, uv = inner(g, Xu, Xu), inner(g, Xv, Xv), inner(g, Xu, Xv)
    gram = uu * vv - uv * uv
    with np.errstate(divide="ignore", invalid="ignore"):
        rank2 = _spans_plane(gram, gram / (uu * vv), eps_reg)
        vol = np.sqrt(np.linalg.det(g)) * np.linalg.det(np.stack([Xu, Xv, DXu], axis=-1))
        K_amb = np.einsum("...abcd,...a,...b,...c,...d->...", riem, Xu, Xv, Xu, Xv) / gram
        K_ext = -(vol * vol) / (gram * gram)
        d2 = inner(g, DXu, DXu)
        lam_defined = np.sqrt(d2) >= eps_reg
        lam = np.where(lam_defined, vol / d2, np.nan)
        cos_s = np.clip(uv / np.sqrt(uu * vv), -1.0, 1.0)
        h_uv = vol / np.sqrt(gram)
    nan = np.where(rank2, 1.0, np.nan)
    return CurvatureReport(K_ambient=K_amb * nan, K_ext=K_ext * nan, K_intrinsic=(K_amb + K_ext) * nan,
                           lam=lam, lam_defined=lam_defined, sigma=np.arccos(cos_s),
                           h_uv=h_uv * nan, rank2=rank2)


def curvature_grid(spec, u, v, step=DEFAULT_STEP, jets=None):
    """Curvature reports over the grid ``u x v``; NaN where invalid or rank deficient."""
    jets = ruling_sweep(spec, u, v, step) if jets is None else jets
    shape = jets.valid.shape
    out = {f: np.full(shape, np.nan) for f in ("K_ambient", "K_ext", "K_intrinsic", "lam", "sigma", "h_uv")}
    lam_defined = np.zeros(shape, dtype=bool)
    rank2 = np.zeros(shape, dtype=bool)
    ok = jets.valid
    if ok.any():
        rep = curvature_from_jets(spec.metric, jets.point[ok], jets.Xu[ok], jets.Xv[ok], jets.DXu[ok],
                                  spec.eps_reg)
        for f in out:
            out[f][ok] = getattr(rep, f)
        lam_defined[ok] = rep.lam_defined
        rank2[ok] = rep.rank2
    return CurvatureReport(lam_defined=lam_defined, rank2=rank2, **out)


def curvature_report(spec, u, v, step=DEFAULT_STEP):
    """Curvature report at a single ``(u, v)``; raises if the tangent plane degenerates."""
    j = evaluate_jet(spec, u, v, step)
    if not j.rank2:
        raise RankDeficientPlane(f"X_u and X_v are dependent at (u, v) = ({u:g}, {v:g})")
    rep = curvature_from_jets(spec.metric, j.point[None], j.Xu[None], j.Xv[None], j.DXu[None], spec.eps_reg)
    return CurvatureReport(**{f: (getattr(rep, f)[0].item()) for f in rep.__dataclass_fields__})


def ruling_angle(spec, u, v, step=DEFAULT_STEP):
    """Angle between ``X_u`` and ``X_v`` at ``(u, v)`` from the base data alone.

    Uses that ``g(X_u, X_v)`` is constant along a unit-speed ruling, so only
    ``|X_u|`` at the point is needed.
    """
    if not spec.normalize_ruling:
        raise ValueError("ruling_angle needs a unit ruling field")
    b = spec.base(u)
    j = evaluate_jet(spec, u, v, step)
    if not j.rank2 and v != 0:
        raise RankDeficientPlane(f"X_u and X_v are dependent at (u, v) = ({u:g}, {v:g})")
    g = spec.metric.metric(j.point)
    na = math.sqrt(inner(b.g[0], b.alpha_prime[0], b.alpha_prime[0]))
    cos_p = inner(b.g[0], b.alpha_prime[0], b.Z[0]) / na
    c = na * cos_p / math.sqrt(inner(g, j.Xu, j.Xu))
    return math.acos(min(1.0, max(-1.0, c)))


def arc_length_spec(spec, u_range, rtol=1e-12):
    """Reparametrize ``spec`` on ``u_range`` by the g-arc length of its base curve.

    Solves ``du/ds = 1 / |alpha'(u)|`` with a dense-output integrator, so
    ``s`` is accurate to roughly ``rtol`` rather than to a table spacing.
    The new parameter also covers a 1% margin beyond both ends (inside the
    original domain) so that finite-difference stencils at ``s = 0`` and
    ``s = L`` stay on the curve.

    Returns
    -------
    (RuledSurfaceSpec, float)
        The new spec, with ``s = 0`` at ``u_range[0]``, and the length ``L``.
    """
    from scipy.integrate import solve_ivp, trapezoid

    u0, u1 = map(float, u_range)
    if not u1 > u0:
        raise ValueError("u_range must be increasing")
    m = spec.metric
    lo, hi = spec.u_domain
    pad = 0.01 * (u1 - u0)
    ends = (max(lo, u0 - pad), min(hi, u1 + pad))

    def speed(u):
        u = np.atleast_1d(u)
        a = _vectorized(spec.alpha, u)
        da = spec._derivative(spec.alpha, spec.alpha_prime, u)
        return np.sqrt(inner(m.metric(a), da, da))

    grid = np.linspace(ends[0], ends[1], 2001)
    bound = 2 * float(trapezoid(speed(grid), grid)) + 1.0

    def solve(sign, stop):
        def hit(s, y):
            return y[0] - stop

        hit.terminal = True
        ev = [hit]
        if sign > 0:
            def end(s, y):
                return y[0] - u1
            ev.append(end)
        sol = solve_ivp(lambda s, y: sign / speed(y[0]), (0.0, bound), [u0], events=ev, dense_output=True,
                        rtol=rtol, atol=rtol * max(1.0, abs(u0), abs(u1)))
        return sol

    fwd = solve(1.0, ends[1])
    if fwd.t_events[1].size == 0:
        raise DegenerateSpec("could not reach the end of the base curve while measuring its length")
    length = float(fwd.t_events[1][0])
    bwd = solve(-1.0, ends[0]) if ends[0] < u0 else None
    s_lo = -float(bwd.t[-1]) if bwd is not None else 0.0

    def u_of(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = fwd.sol(np.maximum(s, 0.0))[0]
        if bwd is not None and np.any(s < 0):
            out = np.where(s < 0, bwd.sol(np.maximum(-s, 0.0))[0], out)
        return out

    def alpha(s):
        return _vectorized(spec.alpha, u_of(s))

    def alpha_prime(s):
        u = u_of(s)
        return spec._derivative(spec.alpha, spec.alpha_prime, u) / speed(u)[:, None]

    def ruling(s):
        return _vectorized(spec.ruling, u_of(s))

    def ruling_prime(s):
        u = u_of(s)
        return spec._derivative(spec.ruling, spec.ruling_prime, u) / speed(u)[:, None]

    new = RuledSurfaceSpec(m, alpha, ruling, alpha_prime=alpha_prime, ruling_prime=ruling_prime,
                           u_domain=(s_lo, float(fwd.t[-1])), normalize_ruling=spec.normalize_ruling,
                           h_fd=spec.h_fd, eps_reg=spec.eps_reg, name=f"{spec.name} (arc length)")
    return new, length
