"""Riemannian metrics on a single 3-dimensional coordinate chart.

All point-wise functions broadcast over leading axes: a point array of
shape ``(..., 3)`` yields metric matrices of shape ``(..., 3, 3)``,
Christoffel symbols of shape ``(..., 3, 3, 3)`` and so on.

Index conventions
-----------------
``dg[..., l, i, j]``          partial_l g_ij
``d2g[..., a, b, i, j]``      partial_a partial_b g_ij
``gamma[..., i, j, k]``       Gamma^i_jk
``riemann[..., i, j, k, l]``  R^i_jkl, the components of R(d_k, d_l) d_j with
                              R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]
``riem[..., a, b, c, d]``     Riem(d_a, d_b, d_c, d_d) = -g(R(d_a, d_b) d_c, d_d)
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegeneratePlane, PointOutsideDomain, SingularMetric
from .profiles import as_trigpoly

H_FD = 1e-5
H_FD2 = 1e-4
EPS_LIN = 1e-10

_EYE = np.eye(3)
# Levi-Civita symbol
_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0


class ChartMetric:
    """A Riemannian metric given by its component matrix on one chart.

    Parameters
    ----------
    g : callable
        ``g(x) -> (..., 3, 3)`` symmetric positive definite matrices.
    dg : callable, optional
        Exact first partials ``dg(x) -> (..., 3, 3, 3)``.  Central finite
        differences with step ``h_fd`` are used when omitted.
    d2g : callable, optional
        Exact second partials ``d2g(x) -> (..., 3, 3, 3, 3)``.  When
        omitted, ``dg`` is differenced (or ``g`` twice) with step ``h_fd2``.
    domain : callable, optional
        ``domain(x) -> bool array``; the whole of R^3 when omitted.
    curvature : float, optional
        Set when the metric has constant sectional curvature.
    """

    def __init__(self, g, dg=None, d2g=None, domain=None, curvature=None,
                 name="custom", h_fd=H_FD, h_fd2=H_FD2, jet=None):
        self._jet = jet
        self._g = g
        self._dg = dg
        self._d2g = d2g
        self._domain = domain
        self.curvature = None if curvature is None else float(curvature)
        self.name = name
        self.h_fd = h_fd
        self.h_fd2 = h_fd2

    def __repr__(self):
        tag = "generic" if self.curvature is None else f"constant({self.curvature:g})"
        return f"ChartMetric(name={self.name!r}, curvature={tag})"

    @property
    def exact_derivatives(self):
        return self._dg is not None

    def metric(self, x):
        return self._g(np.asarray(x, dtype=float))

    def metric_jet(self, x):
        """``(g, dg, d2g)`` in one call; built-in charts share the work."""
        x = np.asarray(x, dtype=float)
        if self._jet is not None:
            return self._jet(x)
        return self.metric(x), self.metric_derivatives(x), self.metric_second_derivatives(x)

    def metric_derivatives(self, x):
        x = np.asarray(x, dtype=float)
        if self._dg is not None:
            return self._dg(x)
        h = self.h_fd
        return np.stack([(self._g(x + h * e) - self._g(x - h * e)) / (2 * h) for e in _EYE], axis=-3)

    def metric_second_derivatives(self, x):
        x = np.asarray(x, dtype=float)
        if self._d2g is not None:
            return self._d2g(x)
        h = self.h_fd2
        if self._dg is not None:
            d2 = np.stack([(self._dg(x + h * e) - self._dg(x - h * e)) / (2 * h) for e in _EYE], axis=-4)
        else:
            g = self._g
            rows = []
            for ea in _EYE:
                cols = []
                for eb in _EYE:
                    cols.append((g(x + h * ea + h * eb) - g(x + h * ea - h * eb)
                                 - g(x - h * ea + h * eb) + g(x - h * ea - h * eb)) / (4 * h * h))
                rows.append(np.stack(cols, axis=-3))
            d2 = np.stack(rows, axis=-4)
        return 0.5 * (d2 + np.swapaxes(d2, -3, -4))

    def inside(self, x):
        x = np.asarray(x, dtype=float)
        ok = np.all(np.isfinite(x), axis=-1)
        if self._domain is not None:
            ok = ok & self._domain(x)
        return ok

    def check_point(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.inside(x)):
            raise PointOutsideDomain(f"point outside the domain of chart {self.name!r}: {x}")
        return x

    def check_positive_definite(self, x):
        """Cholesky test of g at the given points; raises SingularMetric."""
        g = self.metric(x)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise SingularMetric(f"metric not positive definite at {x}") from None
        return g


# ---------------------------------------------------------------------------
# connection and curvature


def _christoffel_parts(dg, ginv):
    # S_ljk = d_j g_lk + d_k g_jl - d_l g_jk
    s = np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg
    shape = s.shape
    gamma = (ginv @ s.reshape(shape[:-3] + (3, 9))).reshape(shape) * 0.5
    return s, gamma


def connection(m, x):
    """Return ``(g, ginv, gamma)`` at ``x`` (no domain checks)."""
    g = m.metric(x)
    ginv = np.linalg.inv(g)
    _, gamma = _christoffel_parts(m.metric_derivatives(x), ginv)
    return g, ginv, gamma


def curvature_data(m, x):
    """Return ``(g, gamma, riemann)`` at ``x`` (no domain checks)."""
    g, dg, d2g = m.metric_jet(x)
    ginv = np.linalg.inv(g)
    s, gamma = _christoffel_parts(dg, ginv)
    lead = s.shape[:-3]
    # dS[m, l, j, k] = d_m S_ljk
    ds = np.swapaxes(d2g, -3, -2) + np.moveaxis(d2g, -3, -1) - d2g
    ginv_b = ginv[..., None, :, :]
    dginv = -(ginv_b @ dg @ ginv_b)
    dgamma = 0.5 * (dginv @ s.reshape(lead + (1, 3, 9)) + ginv_b @ ds.reshape(lead + (3, 3, 9)))
    return g, gamma, _riemann_from(gamma, dgamma.reshape(lead + (3, 3, 3, 3)))


def _riemann_from(gamma, dgamma):
    # A^i_jkl = d_k Gamma^i_lj + Gamma^i_km Gamma^m_lj ; R = A - A(k<->l)
    lead = gamma.shape[:-3]
    gg = (gamma.reshape(lead + (9, 3)) @ gamma.reshape(lead + (3, 9))).reshape(lead + (3, 3, 3, 3))
    # dgamma[k, i, l, j] and gg[i, k, l, j] -> [i, j, k, l]
    a = np.einsum("...kilj->...ijkl", dgamma) + np.einsum("...iklj->...ijkl", gg)
    return a - np.swapaxes(a, -1, -2)


def lower_riemann(g, riemann):
    """``Riem_abcd = -g_di R^i_cab``."""
    return -np.einsum("...di,...icab->...abcd", g, riemann)


@dataclass(frozen=True)
class CurvatureTensors:
    christoffel: np.ndarray
    volume_density: np.ndarray
    riemann: np.ndarray = None
    riem: np.ndarray = None


def christoffel_at(m, p):
    """Christoffel symbols and volume density at ``p``."""
    p = m.check_point(p)
    g = m.check_positive_definite(p)
    ginv = np.linalg.inv(g)
    _, gamma = _christoffel_parts(m.metric_derivatives(p), ginv)
    return CurvatureTensors(christoffel=gamma, volume_density=np.sqrt(np.linalg.det(g)))


def riemann_at(m, p):
    """Christoffel symbols, curvature tensor and lowered Riemann tensor at ``p``."""
    p = m.check_point(p)
    m.check_positive_definite(p)
    g, gamma, riemann = curvature_data(m, p)
    return CurvatureTensors(christoffel=gamma, volume_density=np.sqrt(np.linalg.det(g)),
                            riemann=riemann, riem=lower_riemann(g, riemann))


def inner(g, a, b):
    """``g(a, b)`` for metric matrices ``g``, broadcasting."""
    return np.einsum("...i,...ij,...j->...", a, g, b)


def gamma_contract(gamma, a, b):
    """``Gamma^i_jk a^j b^k``."""
    gamma, a, b = np.broadcast_arrays(gamma, a[..., None, None, :], b[..., None, None, :])
    a, b = a[..., 0, 0, :], b[..., 0, 0, :]
    lead = gamma.shape[:-3]
    t = (gamma.reshape(lead + (9, 3)) @ b[..., :, None]).reshape(lead + (3, 3))
    return (t @ a[..., :, None])[..., 0]


def curvature_contract(riemann, a, b, c):
    """``R^i_jkl a^j b^k c^l``, the components of ``R(b, c) a``."""
    lead = riemann.shape[:-4]
    t = (riemann.reshape(lead + (27, 3)) @ c[..., :, None]).reshape(lead + (9, 3))
    t = (t @ b[..., :, None]).reshape(lead + (3, 3))
    return (t @ a[..., :, None])[..., 0]


def gram_determinant(g, a, b):
    """Return ``(G, G_normalized)`` for the pair ``a, b``."""
    aa, bb, ab = inner(g, a, a), inner(g, b, b), inner(g, a, b)
    det = aa * bb - ab * ab
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(aa * bb > 0, det / (aa * bb), 0.0)
    return det, normalized


def sectional_curvature(m, p, X, Y, eps_lin=EPS_LIN):
    """Sectional curvature of the plane spanned by ``X`` and ``Y`` at ``p``."""
    t = riemann_at(m, p)
    g = m.metric(p)
    det, normalized = gram_determinant(g, X, Y)
    if np.any(normalized <= eps_lin):
        raise DegeneratePlane("vectors do not span a plane")
    return np.einsum("...abcd,...a,...b,...c,...d->...", t.riem, X, Y, X, Y) / det


def covariant_derivative_along(m, curve_point, curve_velocity, field_value, field_derivative):
    """``(nabla_{c'} W)^i = dW^i/du + Gamma^i_jk c'^j W^k``."""
    p = m.check_point(curve_point)
    _, _, gamma = connection(m, p)
    return np.asarray(field_derivative, dtype=float) + gamma_contract(gamma, curve_velocity, field_value)


def volume_form(m, p, A, B, C):
    """Signed Riemannian volume ``sqrt(det g) det[A|B|C]`` (chart orientation)."""
    p = m.check_point(p)
    return _volume(m.metric(p), A, B, C)


def _volume(g, A, B, C):
    mat = np.stack(np.broadcast_arrays(A, B, C), axis=-1)
    return np.sqrt(np.linalg.det(g)) * np.linalg.det(mat)


def metric_cross(g, a, b):
    """The vector ``c`` with ``g(c, w) = vol(a, b, w)`` for all ``w``."""
    lowered = np.sqrt(np.linalg.det(g))[..., None] * np.einsum("ljk,...j,...k->...l", _LEVI, a, b)
    return np.einsum("...il,...l->...i", np.linalg.inv(g), lowered)


# ---------------------------------------------------------------------------
# built-in charts


def euclidean():
    def g(x):
        return np.broadcast_to(_EYE, x.shape[:-1] + (3, 3)).copy()

    def dg(x):
        return np.zeros(x.shape[:-1] + (3, 3, 3))

    def d2g(x):
        return np.zeros(x.shape[:-1] + (3, 3, 3, 3))

    def jet(x):
        return g(x), dg(x), d2g(x)

    return ChartMetric(g, dg, d2g, curvature=0.0, name="euclidean", jet=jet)


def _conformal(phi_parts, domain, curvature, name, kernel_kind=None):
    """Metric ``exp(2 phi) delta``; ``phi_parts(x)`` returns (phi, grad, hessian)."""

    def g(x):
        phi, _, _ = phi_parts(x)
        return np.exp(2 * phi)[..., None, None] * _EYE

    def dg(x):
        phi, grad, _ = phi_parts(x)
        return (2 * np.exp(2 * phi)[..., None] * grad)[..., None, None] * _EYE

    def d2g(x):
        phi, grad, hess = phi_parts(x)
        coef = np.exp(2 * phi)[..., None, None] * (4 * grad[..., :, None] * grad[..., None, :] + 2 * hess)
        return coef[..., None, None] * _EYE

    def jet(x):
        phi, grad, hess = phi_parts(x)
        e2 = np.exp(2 * phi)
        d1 = 2 * e2[..., None] * grad
        d2 = e2[..., None, None] * (4 * grad[..., :, None] * grad[..., None, :] + 2 * hess)
        return e2[..., None, None] * _EYE, d1[..., None, None] * _EYE, d2[..., None, None] * _EYE

    if kernel_kind is not None and _kernels.AVAILABLE:
        def jet(x):  # noqa: F811 - same values, fused
            return _kernels.conformal_jet(x, kernel_kind, curvature)

    return ChartMetric(g, dg, d2g, domain=domain, curvature=curvature, name=name, jet=jet)


def sphere(k=1.0):
    """Stereographic chart of the 3-sphere of curvature ``k``: ``4 / (1 + k|x|^2)^2 delta``."""
    if k <= 0:
        raise ValueError("sphere chart needs k > 0")

    def parts(x):
        q = 1 + k * np.sum(x * x, axis=-1)
        phi = np.log(2.0) - np.log(q)
        grad = -2 * k * x / q[..., None]
        hess = (-2 * k / q)[..., None, None] * _EYE + 4 * k * k * x[..., :, None] * x[..., None, :] / (q * q)[..., None, None]
        return phi, grad, hess

    def domain(x):
        # the antipode of the chart origin sits at infinity
        return np.sum(x * x, axis=-1) < 1e12 / k

    return _conformal(parts, domain, k, f"sphere(k={k:g})", kernel_kind=0)


def hyperbolic_halfspace(k=-1.0):
    """Upper half-space chart ``(1 / (-k z^2)) delta`` of curvature ``k < 0``."""
    if k >= 0:
        raise ValueError("half-space chart needs k < 0")

    def parts(x):
        z = x[..., 2]
        phi = -0.5 * np.log(-k) - np.log(z)
        grad = np.zeros_like(x)
        grad[..., 2] = -1.0 / z
        hess = np.zeros(x.shape + (3,))
        hess[..., 2, 2] = 1.0 / (z * z)
        return phi, grad, hess

    def domain(x):
        return x[..., 2] > 0

    return _conformal(parts, domain, k, f"halfspace(k={k:g})", kernel_kind=1)


def _diagonal(parts, domain, name):
    """Diagonal metric; ``parts(x)`` returns h, dh[l, i], d2h[a, b, i] of the diagonal."""

    def g(x):
        h, _, _ = parts(x)
        return h[..., :, None] * _EYE

    def dg(x):
        _, dh, _ = parts(x)
        return dh[..., :, :, None] * _EYE

    def d2g(x):
        _, _, d2h = parts(x)
        return d2h[..., :, :, :, None] * _EYE

    def jet(x):
        h, dh, d2h = parts(x)
        if _kernels.AVAILABLE:
            return _kernels.diagonal_jet(h, dh, d2h)
        return h[..., :, None] * _EYE, dh[..., :, :, None] * _EYE, d2h[..., :, :, :, None] * _EYE

    return ChartMetric(g, dg, d2g, domain=domain, name=name, jet=jet)


def product_revolution(profile):
    """``dt^2 + f(b)^2 da^2 + (1 + f'(b)^2) db^2`` on coordinates (t, a, b).

    The product of a line with the surface of revolution generated by
    rotating the graph of ``f`` about an axis; ``a`` is the rotation angle
    and ``b`` the axial coordinate.
    """
    f = as_trigpoly(profile)

    def parts(x):
        b = x[..., 2]
        f0, f1, f2, f3 = f.jet(b, 3)
        shape = x.shape[:-1]
        h = np.stack([np.ones(shape), f0 * f0, 1 + f1 * f1], axis=-1)
        dh = np.zeros(shape + (3, 3))
        dh[..., 2, 1] = 2 * f0 * f1
        dh[..., 2, 2] = 2 * f1 * f2
        d2h = np.zeros(shape + (3, 3, 3))
        d2h[..., 2, 2, 1] = 2 * (f1 * f1 + f0 * f2)
        d2h[..., 2, 2, 2] = 2 * (f2 * f2 + f1 * f3)
        return h, dh, d2h

    def domain(x):
        return f(x[..., 2]) > 0

    return _diagonal(parts, domain, "product_revolution")


def warped(profile):
    """``dt^2 + f(t)^2 (dx^2 + dy^2)`` on coordinates (t, x, y), flat fibre."""
    f = as_trigpoly(profile)

    def parts(x):
        t = x[..., 0]
        f0, f1, f2 = f.jet(t, 2)
        shape = x.shape[:-1]
        h = np.stack([np.ones(shape), f0 * f0, f0 * f0], axis=-1)
        dh = np.zeros(shape + (3, 3))
        dh[..., 0, 1] = dh[..., 0, 2] = 2 * f0 * f1
        d2h = np.zeros(shape + (3, 3, 3))
        d2h[..., 0, 0, 1] = d2h[..., 0, 0, 2] = 2 * (f1 * f1 + f0 * f2)
        return h, dh, d2h

    def domain(x):
        return f(x[..., 0]) > 0

    return _diagonal(parts, domain, "warped")


def space_form(k):
    """The built-in chart of constant curvature ``k``."""
    if k > 0:
        return sphere(k)
    if k < 0:
        return hyperbolic_halfspace(k)
    return euclidean()
