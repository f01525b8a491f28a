"""Sannia frames and invariants along the base curve of a ruled surface.

With ``Z = kappa0 X1``, the frame is ``X1``, ``X2 = nabla_{alpha'} X1 / kappa1``
and ``X3`` completing a positive orthonormal basis.  ``kappa2`` is the
``X3`` component of ``nabla_{alpha'} X2``, which is differenced over ``u``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NotGeneralPosition
from .io import read_csv, write_csv
from .manifold import connection, gamma_contract, inner, metric_cross

EPS_GP = 1e-7
EPS_ANGLE = 1e-7
FD_STEP = 1e-3


@dataclass
class SanniaFrame:
    X1: np.ndarray
    X2: np.ndarray
    X3: np.ndarray
    point: np.ndarray = None
    g: np.ndarray = None

    def matrix(self):
        """Frame vectors as columns."""
        return np.stack([self.X1, self.X2, self.X3], axis=-1)

    def orthonormality_error(self):
        E = self.matrix()
        gram = np.swapaxes(E, -1, -2) @ self.g @ E
        return np.max(np.abs(gram - np.eye(3)), axis=(-1, -2))


@dataclass
class _Pointwise:
    base: object
    kappa0: np.ndarray
    dkappa0: np.ndarray
    kappa1: np.ndarray
    gram: np.ndarray
    frame: SanniaFrame


def _pointwise(spec, u):
    b = spec.base(u, normalize=False)
    g = b.g
    k0 = np.sqrt(inner(g, b.Z, b.Z))
    X1 = b.Z / k0[:, None]
    dk0 = inner(g, b.W, X1)
    DX1 = (b.W - dk0[:, None] * X1) / k0[:, None]
    k1 = np.sqrt(inner(g, DX1, DX1))
    ww = inner(g, b.W, b.W)
    with np.errstate(divide="ignore", invalid="ignore"):
        gram = np.where(ww > 0, 1.0 - dk0 * dk0 / ww, 0.0)
        X2 = DX1 / k1[:, None]
    X3 = metric_cross(g, X1, X2)
    return _Pointwise(base=b, kappa0=k0, dkappa0=dk0, kappa1=k1, gram=gram,
                      frame=SanniaFrame(X1, X2, X3, point=b.alpha, g=g))


def is_general_position(spec, u, eps_gp=EPS_GP):
    """Whether ``Z`` and ``nabla_{alpha'} Z`` are independent at ``u``.

    Returns ``(ok, diagnostics)``; for array ``u`` both are per sample.
    """
    scalar = np.ndim(u) == 0
    p = _pointwise(spec, u)
    ok = (p.gram > eps_gp) & (p.kappa1 > eps_gp)
    diag = {"normalized_gram": p.gram, "kappa1": p.kappa1}
    if scalar:
        return bool(ok[0]), {k: float(v[0]) for k, v in diag.items()}
    return ok, diag


def _require_general_position(p, u, eps_gp):
    bad = ~((p.gram > eps_gp) & (p.kappa1 > eps_gp))
    if bad.any():
        i = int(np.argmax(bad))
        raise NotGeneralPosition(
            f"not in general position at u = {u[i]:g} (normalized Gram {p.gram[i]:.3g}, kappa1 {p.kappa1[i]:.3g})",
            u=float(u[i]))


def sannia_frame_at(spec, u, eps_gp=EPS_GP):
    """The Sannia frame at a single parameter ``u``."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    p = _pointwise(spec, u_arr)
    _require_general_position(p, u_arr, eps_gp)
    f = p.frame
    if np.ndim(u) == 0:
        return SanniaFrame(f.X1[0], f.X2[0], f.X3[0], point=f.point[0], g=f.g[0])
    return f


@dataclass
class SanniaInvariants:
    """Invariants sampled on ``u``; ``theta`` is NaN where ``cos(phi)`` vanishes."""

    u: np.ndarray
    kappa0: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    dkappa0: np.ndarray = None
    alpha_speed: np.ndarray = None
    frame: SanniaFrame = None
    angle_degenerate: np.ndarray = field(default=None)

    def distribution_parameter(self):
        """Distribution parameter at ``v = 0`` expressed through the invariants."""
        k0, k1, dk0 = self.kappa0, self.kappa1, self.dkappa0
        cphi = np.cos(self.phi)
        st = np.where(self.angle_degenerate, 0.0, np.sin(np.nan_to_num(self.theta)))
        return self.alpha_speed * k0 * k0 * k1 * cphi * st / (dk0 * dk0 + k0 * k0 * k1 * k1)


def _fd5(fm2, fm1, fp1, fp2, h):
    return (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)


def sannia_invariants(spec, u_grid, fd_step=FD_STEP, eps_gp=EPS_GP):
    """Sannia invariants on ``u_grid``.

    ``kappa2`` uses a five-point central difference of ``X2`` with step
    ``fd_step``; the stencil may reach ``2 * fd_step`` outside the grid,
    so the surface must be defined there.
    """
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    p = _pointwise(spec, u)
    _require_general_position(p, u, eps_gp)
    b, f = p.base, p.frame
    h = fd_step
    X2s = []
    for s in (-2, -1, 1, 2):
        q = _pointwise(spec, u + s * h)
        _require_general_position(q, u + s * h, eps_gp)
        X2s.append(q.frame.X2)
    dX2 = _fd5(*X2s, h)
    _, _, gamma = connection(spec.metric, b.alpha)
    DX2 = dX2 + gamma_contract(gamma, b.alpha_prime, f.X2)
    k2 = inner(b.g, DX2, f.X3)

    speed = np.sqrt(inner(b.g, b.alpha_prime, b.alpha_prime))
    T = b.alpha_prime / speed[:, None]
    c1, c2, c3 = (inner(b.g, T, X) for X in (f.X1, f.X2, f.X3))
    phi = np.arcsin(np.clip(c2, -1.0, 1.0))
    degenerate = np.hypot(c1, c3) < EPS_ANGLE
    theta = np.where(degenerate, np.nan, np.arctan2(c3, c1))
    theta = _unwrap_nan(theta)
    return SanniaInvariants(u=u, kappa0=p.kappa0, kappa1=p.kappa1, kappa2=k2, theta=theta, phi=phi,
                            dkappa0=p.dkappa0, alpha_speed=speed, frame=f, angle_degenerate=degenerate)


def _unwrap_nan(theta):
    """Unwrap across the finite entries, leaving NaN samples in place."""
    out = theta.copy()
    ok = np.isfinite(theta)
    if ok.sum() > 1:
        out[ok] = np.unwrap(theta[ok])
    return out


def frame_derivative_residual(spec, inv, fd_step=FD_STEP):
    """Residuals of the frame equations on the grid of ``inv``.

    Differences every frame vector over ``u``, adds the connection term and
    compares with ``(kappa1 X2, -kappa1 X1 + kappa2 X3, -kappa2 X2)``.
    Returns the max metric norm of the three residuals per sample.
    """
    u = inv.u
    h = fd_step
    fr = [_pointwise(spec, u + s * h).frame for s in (-2, -1, 1, 2)]
    b = spec.base(u, normalize=False)
    _, _, gamma = connection(spec.metric, b.alpha)
    f = inv.frame
    expected = (inv.kappa1[:, None] * f.X2,
                -inv.kappa1[:, None] * f.X1 + inv.kappa2[:, None] * f.X3,
                -inv.kappa2[:, None] * f.X2)
    res = []
    for name, exp in zip(("X1", "X2", "X3"), expected):
        d = _fd5(*(getattr(q, name) for q in fr), h)
        D = d + gamma_contract(gamma, b.alpha_prime, getattr(f, name))
        r = D - exp
        res.append(np.sqrt(inner(b.g, r, r)))
    return np.max(np.stack(res), axis=0)


def write_invariants_csv(path, inv):
    write_csv(path, ["u", "kappa0", "kappa1", "kappa2", "theta", "phi"],
              np.column_stack([inv.u, inv.kappa0, inv.kappa1, inv.kappa2, inv.theta, inv.phi]))


def read_invariants_csv(path):
    cols = read_csv(path)
    return SanniaInvariants(u=cols["u"], kappa0=cols["kappa0"], kappa1=cols["kappa1"],
                            kappa2=cols["kappa2"], theta=cols["theta"], phi=cols["phi"])

