"""Fused per-row kernels for the integrator right-hand sides.

The numpy versions in :mod:`manifold` are the reference; these compute the
same quantities row by row from a metric jet and are only used when numba
is importable.
"""

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

AVAILABLE = numba is not None


def _inv3(g, out):
    a, b, c = g[0, 0], g[0, 1], g[0, 2]
    d, e, f = g[1, 0], g[1, 1], g[1, 2]
    p, q, r = g[2, 0], g[2, 1], g[2, 2]
    c00 = e * r - f * q
    c01 = c * q - b * r
    c02 = b * f - c * e
    det = a * c00 + d * c01 + p * c02
    out[0, 0] = c00 / det
    out[0, 1] = c01 / det
    out[0, 2] = c02 / det
    out[1, 0] = (f * p - d * r) / det
    out[1, 1] = (a * r - c * p) / det
    out[1, 2] = (c * d - a * f) / det
    out[2, 0] = (d * q - e * p) / det
    out[2, 1] = (b * p - a * q) / det
    out[2, 2] = (a * e - b * d) / det


def _christoffel_row(g, dg, ginv, low, gam):
    _inv3(g, ginv)
    for l in range(3):
        for j in range(3):
            for k in range(3):
                low[l, j, k] = 0.5 * (dg[j, l, k] + dg[k, j, l] - dg[l, j, k])
    for i in range(3):
        for j in range(3):
            for k in range(3):
                s = 0.0
                for l in range(3):
                    s += ginv[i, l] * low[l, j, k]
                gam[i, j, k] = s


def _gamma_rhs(g, dg, y, out, with_transport):
    n = y.shape[0]
    ginv = np.empty((3, 3))
    low = np.empty((3, 3, 3))
    gam = np.empty((3, 3, 3))
    for r in range(n):
        _christoffel_row(g[r], dg[r], ginv, low, gam)
        for i in range(3):
            out[r, i] = y[r, 3 + i]
            s = 0.0
            t = 0.0
            for j in range(3):
                for k in range(3):
                    s += gam[i, j, k] * y[r, 3 + j] * y[r, 3 + k]
                    if with_transport:
                        t += gam[i, j, k] * y[r, 3 + j] * y[r, 6 + k]
            out[r, 3 + i] = -s
            if with_transport:
                out[r, 6 + i] = -t


def _dgamma_dir(D, D2, ginv, low, e, a, b, tmp, t2, lab, dl, out):
    """``out^i = (d_e Gamma)^i_jk a^j b^k`` without forming the full derivative."""
    # De = d_e g, tmp = ginv De ginv = -d_e g^{-1}
    for p in range(3):
        for q in range(3):
            s = 0.0
            for m in range(3):
                s += e[m] * D[m, p, q]
            tmp[p, q] = s
    for p in range(3):
        for q in range(3):
            s = 0.0
            for c in range(3):
                s += tmp[p, c] * ginv[c, q]
            t2[p, q] = s
    for L in range(3):
        s = 0.0
        d = 0.0
        for j in range(3):
            for k in range(3):
                w = a[j] * b[k]
                s += low[L, j, k] * w
                for m in range(3):
                    d += e[m] * w * 0.5 * (D2[m, j, L, k] + D2[m, k, j, L] - D2[m, L, j, k])
        lab[L] = s
        dl[L] = d
    for i in range(3):
        s = 0.0
        for L in range(3):
            h = 0.0
            for c in range(3):
                h += ginv[i, c] * t2[c, L]
            s += -h * lab[L] + ginv[i, L] * dl[L]
        out[i] = s


def _gamma_vec(gam, a, b, out):
    for i in range(3):
        s = 0.0
        for j in range(3):
            for k in range(3):
                s += gam[i, j, k] * a[j] * b[k]
        out[i] = s


def _jacobi_rhs(g, dg, d2g, y, out):
    n = y.shape[0]
    ginv = np.empty((3, 3))
    low = np.empty((3, 3, 3))
    gam = np.empty((3, 3, 3))
    tmp = np.empty((3, 3))
    t2 = np.empty((3, 3))
    lab = np.empty(3)
    dl = np.empty(3)
    xd = np.empty(3)
    J = np.empty(3)
    A = np.empty(3)
    B = np.empty(3)
    gxx = np.empty(3)
    gjx = np.empty(3)
    C = np.empty(3)
    Dv = np.empty(3)
    gdj = np.empty(3)
    for r in range(n):
        G, D, D2 = g[r], dg[r], d2g[r]
        _christoffel_row(G, D, ginv, low, gam)
        for i in range(3):
            xd[i] = y[r, 3 + i]
            J[i] = y[r, 6 + i]
        # R(J, xd) xd = (d_J Gamma)(xd, xd) - (d_xd Gamma)(J, xd)
        #             + Gamma(J, Gamma(xd, xd)) - Gamma(xd, Gamma(J, xd))
        _dgamma_dir(D, D2, ginv, low, J, xd, xd, tmp, t2, lab, dl, A)
        _dgamma_dir(D, D2, ginv, low, xd, J, xd, tmp, t2, lab, dl, B)
        _gamma_vec(gam, xd, xd, gxx)
        _gamma_vec(gam, J, xd, gjx)
        _gamma_vec(gam, J, gxx, C)
        _gamma_vec(gam, xd, gjx, Dv)
        for i in range(3):
            gdj[i] = 0.0
            for j in range(3):
                for k in range(3):
                    gdj[i] += gam[i, j, k] * xd[j] * y[r, 9 + k]
        for i in range(3):
            out[r, i] = xd[i]
            out[r, 3 + i] = -gxx[i]
            out[r, 6 + i] = y[r, 9 + i] - gjx[i]
            out[r, 9 + i] = -(A[i] - B[i] + C[i] - Dv[i]) - gdj[i]


def _conformal_jet(x, kind, k, g, dg, d2g):
    """Jet of ``exp(2 phi) delta``: kind 0 is the stereographic sphere, 1 the half-space."""
    n = x.shape[0]
    grad = np.empty(3)
    hess = np.empty((3, 3))
    for r in range(n):
        if kind == 0:
            q = 1.0 + k * (x[r, 0] ** 2 + x[r, 1] ** 2 + x[r, 2] ** 2)
            e2 = 4.0 / (q * q)
            for a in range(3):
                grad[a] = -2.0 * k * x[r, a] / q
                for b in range(3):
                    hess[a, b] = 4.0 * k * k * x[r, a] * x[r, b] / (q * q)
                hess[a, a] -= 2.0 * k / q
        else:
            z = x[r, 2]
            e2 = 1.0 / (-k * z * z)
            for a in range(3):
                grad[a] = 0.0
                for b in range(3):
                    hess[a, b] = 0.0
            grad[2] = -1.0 / z
            hess[2, 2] = 1.0 / (z * z)
        for i in range(3):
            for j in range(3):
                delta = 1.0 if i == j else 0.0
                g[r, i, j] = e2 * delta
                for a in range(3):
                    dg[r, a, i, j] = 2.0 * e2 * grad[a] * delta
                    for b in range(3):
                        d2g[r, a, b, i, j] = e2 * (4.0 * grad[a] * grad[b] + 2.0 * hess[a, b]) * delta


def _diagonal_jet(h, dh, d2h, g, dg, d2g):
    n = h.shape[0]
    for r in range(n):
        for i in range(3):
            for j in range(3):
                g[r, i, j] = h[r, i] if i == j else 0.0
                for a in range(3):
                    dg[r, a, i, j] = dh[r, a, i] if i == j else 0.0
                    for b in range(3):
                        d2g[r, a, b, i, j] = d2h[r, a, b, i] if i == j else 0.0


def _trig_derivs(t, poly, trig, nmax, out):
    """``out[n, r]`` is the n-th derivative of the profile at ``t[r]``."""
    m = poly.shape[0]
    for r in range(t.shape[0]):
        for n in range(nmax + 1):
            s = 0.0
            # d^n/dt^n of sum c_i t^i
            for i in range(n, m):
                c = poly[i]
                for j in range(n):
                    c *= i - j
                s += c * t[r] ** (i - n)
            for q in range(trig.shape[0]):
                a, w, ph = trig[q, 0], trig[q, 1], trig[q, 2]
                s += a * w**n * np.sin(w * t[r] + ph + n * np.pi / 2)
            out[n, r] = s


def _gamma_apply(g, dg, a, B, out):
    """``out[r, q] = Gamma(a[r], B[r, q])`` at every row."""
    ginv = np.empty((3, 3))
    low = np.empty((3, 3, 3))
    gam = np.empty((3, 3, 3))
    for r in range(a.shape[0]):
        _christoffel_row(g[r], dg[r], ginv, low, gam)
        for q in range(B.shape[1]):
            for i in range(3):
                s = 0.0
                for j in range(3):
                    for k in range(3):
                        s += gam[i, j, k] * a[r, j] * B[r, q, k]
                out[r, q, i] = s


if AVAILABLE:
    _opts = dict(cache=True, nogil=True, fastmath=False)
    _inv3 = numba.njit(**_opts)(_inv3)
    _christoffel_row = numba.njit(**_opts)(_christoffel_row)
    _gamma_rhs = numba.njit(**_opts)(_gamma_rhs)
    _dgamma_dir = numba.njit(**_opts)(_dgamma_dir)
    _gamma_vec = numba.njit(**_opts)(_gamma_vec)
    _jacobi_rhs = numba.njit(**_opts)(_jacobi_rhs)
    _conformal_jet = numba.njit(**_opts)(_conformal_jet)
    _gamma_apply = numba.njit(**_opts)(_gamma_apply)
    _diagonal_jet = numba.njit(**_opts)(_diagonal_jet)
    _trig_derivs = numba.njit(**_opts)(_trig_derivs)


def geodesic_rhs_kernel(g, dg, y, with_transport=False):
    out = np.empty_like(y)
    _gamma_rhs(np.ascontiguousarray(g), np.ascontiguousarray(dg), np.ascontiguousarray(y), out, with_transport)
    return out


def jacobi_rhs_kernel(g, dg, d2g, y):
    out = np.empty_like(y)
    _jacobi_rhs(np.ascontiguousarray(g), np.ascontiguousarray(dg), np.ascontiguousarray(d2g),
                np.ascontiguousarray(y), out)
    return out


def _jet_buffers(shape):
    return np.empty(shape + (3, 3)), np.empty(shape + (3, 3, 3)), np.empty(shape + (3, 3, 3, 3))


def conformal_jet(x, kind, k):
    shape = x.shape[:-1]
    flat = np.ascontiguousarray(x.reshape(-1, 3))
    g, dg, d2g = _jet_buffers(flat.shape[:1])
    _conformal_jet(flat, kind, float(k), g, dg, d2g)
    return g.reshape(shape + (3, 3)), dg.reshape(shape + (3, 3, 3)), d2g.reshape(shape + (3, 3, 3, 3))


def diagonal_jet(h, dh, d2h):
    shape = h.shape[:-1]
    g, dg, d2g = _jet_buffers((int(np.prod(shape)),))
    _diagonal_jet(np.ascontiguousarray(h.reshape(-1, 3)), np.ascontiguousarray(dh.reshape(-1, 3, 3)),
                  np.ascontiguousarray(d2h.reshape(-1, 3, 3, 3)), g, dg, d2g)
    return g.reshape(shape + (3, 3)), dg.reshape(shape + (3, 3, 3)), d2g.reshape(shape + (3, 3, 3, 3))


def trig_derivs(t, poly, trig, nmax):
    """Stacked derivatives ``0..nmax`` of a trigonometric polynomial."""
    flat = np.ascontiguousarray(np.ravel(t), dtype=float)
    out = np.empty((nmax + 1, flat.size))
    _trig_derivs(flat, np.asarray(poly, dtype=float).reshape(-1),
                 np.asarray(trig, dtype=float).reshape(-1, 3), nmax, out)
    return out.reshape((nmax + 1,) + np.shape(t))


def gamma_apply(g, dg, a, B):
    """``Gamma(a, B[:, q])`` for each of the vectors stacked on axis 1 of ``B``."""
    out = np.empty(B.shape)
    _gamma_apply(np.ascontiguousarray(g), np.ascontiguousarray(dg), np.ascontiguousarray(a),
                 np.ascontiguousarray(B), out)
    return out
