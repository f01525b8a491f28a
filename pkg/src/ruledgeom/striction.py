"""Central points and striction curves.

The Jacobi evolution function ``F = g(nabla_{X_v} X_u, X_u)`` vanishes
exactly at the central points of each ruling.  In constant curvature it
has a closed form in terms of two base-curve coefficients; in general it
is sampled along the rulings and its sign changes are refined.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisViolated
from .geodesic import DEFAULT_STEP, integrate_rulings, jacobi_rhs, rk4_step
from .manifold import curvature_contract, curvature_data, inner, lower_riemann
from .ruled_surface import curvature_from_jets
from .sannia import EPS_GP, _pointwise

EPS_ROOT = 1e-10
ROOT_VTOL = 1e-9
EPS_TOUCH = 1e-7
EPS_CLASS = 1e-6
ATANH_MARGIN = 1e-9
H_NABLA_R = 1e-4
N_COARSE = 64


# ---------------------------------------------------------------------------
# F and its derivatives


@dataclass
class JacobiEvolutionSample:
    u: np.ndarray
    v: np.ndarray
    F: np.ndarray
    dFdv: np.ndarray
    d2Fdv2: np.ndarray


def _riem4(riem, a, b, c, d):
    return np.einsum("...abcd,...a,...b,...c,...d->...", riem, a, b, c, d)


def _nabla_riemann_dir(m, x, X, h=H_NABLA_R):
    """``(nabla_X R)^i_jkl`` at ``x`` from central differences of ``R`` along ``X``.

    The chart-coordinate difference gives ``X(R^i_jkl)``; the connection
    terms make it tensorial.
    """
    _, gamma, R = curvature_data(m, x)
    _, _, Rp = curvature_data(m, x + h * X)
    _, _, Rm = curvature_data(m, x - h * X)
    dR = (Rp - Rm) / (2 * h)
    GX = np.einsum("...imp,...m->...ip", gamma, X)  # Gamma^i_{m p} X^m
    out = dR + np.einsum("...ip,...pjkl->...ijkl", GX, R)
    out -= np.einsum("...pj,...ipkl->...ijkl", GX, R)
    out -= np.einsum("...pk,...ijpl->...ijkl", GX, R)
    out -= np.einsum("...pl,...ijkp->...ijkl", GX, R)
    return out


def evolution_from_jets(m, point, Xu, Xv, DXu):
    """``F`` and two ``v``-derivatives for flat arrays of jet data."""
    g, _, R = curvature_data(m, point)
    riem = lower_riemann(g, R)
    F = inner(g, DXu, Xu)
    dF = -_riem4(riem, Xv, Xu, Xv, Xu) + inner(g, DXu, DXu)
    d2F = -4 * _riem4(riem, Xv, Xu, Xv, DXu)
    if m.curvature is None:
        nR = _nabla_riemann_dir(m, point, Xv)
        # (nabla_Xv R)(Xv, Xu) Xv ^i = (nabla R)^i_jkl Xv^j Xv^k Xu^l
        d2F = d2F + inner(g, curvature_contract(nR, Xv, Xv, Xu), Xu)
    return F, dF, d2F


def jacobi_evolution(jets, m):
    """Evolution samples on a jet grid from :func:`ruled_surface.ruling_sweep`."""
    shape = jets.valid.shape
    F, dF, d2F = (np.full(shape, np.nan) for _ in range(3))
    ok = jets.valid
    if ok.any():
        F[ok], dF[ok], d2F[ok] = evolution_from_jets(m, jets.point[ok], jets.Xu[ok], jets.Xv[ok], jets.DXu[ok])
    return JacobiEvolutionSample(u=jets.u, v=jets.v, F=F, dFdv=dF, d2Fdv2=d2F)


def evaluate_F(spec, u, v, step=DEFAULT_STEP):
    """``F``, ``dF/dv`` and ``d2F/dv2`` at a single ``(u, v)``."""
    from .ruled_surface import evaluate_jet

    _require_unit(spec)
    j = evaluate_jet(spec, u, v, step)
    F, dF, d2F = evolution_from_jets(spec.metric, j.point[None], j.Xu[None], j.Xv[None], j.DXu[None])
    return JacobiEvolutionSample(u=float(u), v=float(v), F=float(F[0]), dFdv=float(dF[0]), d2Fdv2=float(d2F[0]))


def _require_unit(spec):
    if not spec.normalize_ruling:
        raise HypothesisViolated("the striction tools need a unit ruling field (normalize_ruling=True)")


# ---------------------------------------------------------------------------
# space forms


@dataclass
class SpaceFormFCoefficients:
    C1: float
    C2: float
    k: float


def spaceform_F(coeffs, v):
    """Closed-form ``F`` along a ruling in a space form."""
    v = np.asarray(v, dtype=float)
    k = coeffs.k
    if k > 0:
        w = math.sqrt(4 * k)
        return coeffs.C1 * np.cos(w * v) + coeffs.C2 * np.sin(w * v)
    if k < 0:
        w = math.sqrt(-4 * k)
        return coeffs.C1 * np.cosh(w * v) + coeffs.C2 * np.sinh(w * v)
    return coeffs.C1 + coeffs.C2 * v


@dataclass
class BaseTerms:
    """Base-curve quantities entering the closed forms, one entry per ``u``."""

    u: np.ndarray
    alpha_norm: np.ndarray
    sigma: np.ndarray
    W_norm: np.ndarray
    C1: np.ndarray
    D: np.ndarray  # -k |alpha'|^2 sin^2 sigma + |W|^2 = F'(0)


def base_terms(spec, u, k):
    _require_unit(spec)
    b = spec.base(u)
    na = np.sqrt(inner(b.g, b.alpha_prime, b.alpha_prime))
    cos_s = np.clip(inner(b.g, b.alpha_prime, b.Z) / na, -1.0, 1.0)
    W2 = inner(b.g, b.W, b.W)
    D = -k * na * na * (1 - cos_s * cos_s) + W2
    return BaseTerms(u=b.u, alpha_norm=na, sigma=np.arccos(cos_s), W_norm=np.sqrt(W2),
                     C1=inner(b.g, b.W, b.alpha_prime), D=D)


def spaceform_coefficients(spec, u, k):
    """``(C1, C2)`` at each ``u`` as :class:`SpaceFormFCoefficients`."""
    t = base_terms(spec, u, k)
    C2 = t.D / math.sqrt(abs(4 * k)) if k != 0 else t.D
    return [SpaceFormFCoefficients(float(a), float(c), k) for a, c in zip(t.C1, C2)]


@dataclass
class Verdict:
    """Per-ruling outcome: ``kind`` is 'found', 'not_found' or 'degenerate'."""

    u: float
    kind: str
    v: float = math.nan
    roots: list = field(default_factory=list)
    diagnostics: str = ""


def spaceform_striction_v(spec, u, k, tol=1e-14):
    """Closed-form striction parameter on each ruling of a space-form surface.

    For ``k > 0`` every root in one geodesic period ``[0, 2 pi / sqrt k)`` is
    listed in ``roots`` and ``v`` is the principal (arctan) branch.
    """
    t = base_terms(spec, u, k)
    out = []
    for i, s in enumerate(t.u):
        C1, D = float(t.C1[i]), float(t.D[i])
        scale = max(1.0, abs(C1), abs(D))
        if abs(C1) <= tol * scale and abs(D) <= tol * scale:
            out.append(Verdict(float(s), "degenerate", diagnostics="F vanishes identically on the ruling"))
            continue
        if k == 0:
            W2 = float(t.W_norm[i]) ** 2
            if W2 <= tol * scale:
                out.append(Verdict(float(s), "not_found", diagnostics="F is a nonzero constant on the ruling"))
                continue
            v = -C1 / W2
            out.append(Verdict(float(s), "found", v=v, roots=[v]))
        elif k > 0:
            w = math.sqrt(4 * k)
            if abs(D) <= tol * scale:
                v = math.pi / (2 * w)  # both +-pi/(2w) are roots; listed below
            else:
                v = math.atan(-w * C1 / D) / w
            period = 2 * math.pi / math.sqrt(k)
            base = v % (math.pi / w)
            roots = sorted({round(r, 15) for r in (base + n * math.pi / w for n in range(4)) if r < period})
            out.append(Verdict(float(s), "found", v=v, roots=roots))
        else:
            w = math.sqrt(-4 * k)
            if abs(D) <= tol * scale:
                out.append(Verdict(float(s), "not_found",
                                   diagnostics="arctanh-domain violation: F'(0) = 0 with F(0) != 0"))
                continue
            arg = -w * C1 / D
            if abs(arg) >= 1 - ATANH_MARGIN:
                out.append(Verdict(float(s), "not_found",
                                   diagnostics=f"arctanh-domain violation: |argument| = {abs(arg):.12g} >= 1"))
                continue
            v = math.atanh(arg) / w
            out.append(Verdict(float(s), "found", v=v, roots=[v]))
    return out


# ---------------------------------------------------------------------------
# numeric search


@dataclass
class Root:
    """A central point; ``state`` is the (x, X_v, X_u, nabla_{X_v} X_u) row there."""

    v: float
    F: float
    state: np.ndarray
    kind: str = "crossing"  # or "tangential"

    @property
    def point(self):
        return self.state[:3]


@dataclass
class Branch:
    branch_id: int
    u: list = field(default_factory=list)
    v: list = field(default_factory=list)
    points: list = field(default_factory=list)
    states: list = field(default_factory=list)


@dataclass
class StrictionResult:
    verdicts: list
    branches: list

    def roots_at(self, i):
        return [r.v for r in self.verdicts[i].roots]


def _fine_grid(v0, v1, n_coarse, step):
    """Coarse samples plus the integrator's own sub-step nodes between them."""
    coarse = np.linspace(v0, v1, n_coarse)
    pieces = [coarse[:1]]
    for a, b in zip(coarse[:-1], coarse[1:]):
        n = max(1, math.ceil(abs(b - a) / step - 1e-9))
        pieces.append(a + (b - a) * np.arange(1, n + 1) / n)
    return coarse, np.concatenate(pieces)


def _F_of_state(m, y):
    g = m.metric(y[:, :3])
    return inner(g, y[:, 9:12], y[:, 6:9])


def _refine_crossings(m, rhs, v_start, y_start, h, tol=1e-13):
    """Bisect the sign change of ``F`` inside one integrator step per row.

    ``h`` is the signed step from ``v_start`` to the other end of the
    bracket.  Each trial point is one RK4 step of length ``delta`` from the
    stored state, i.e. what the integrator itself would produce.
    """
    sgn, width = np.sign(h), np.abs(h)

    def F_at(d):
        return _F_of_state(m, rk4_step(rhs, 0.0, y_start, (sgn * d)[:, None]))

    lo, hi = np.zeros_like(width), width.copy()
    Flo, Fhi = _F_of_state(m, y_start), F_at(hi)
    while np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        Fm = F_at(mid)
        left = np.sign(Fm) == np.sign(Flo)
        lo, Flo = np.where(left, mid, lo), np.where(left, Fm, Flo)
        hi, Fhi = np.where(left, hi, mid), np.where(left, Fhi, Fm)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(Fhi != Flo, Flo / (Flo - Fhi), 0.5)
    delta = lo + np.clip(frac, 0, 1) * (hi - lo)
    y = rk4_step(rhs, 0.0, y_start, (sgn * delta)[:, None])
    return v_start + sgn * delta, y, _F_of_state(m, y)


def _refine_minimum(m, rhs, v_left, y_left, h, iters=60):
    """Golden-section search of ``|F|`` over two adjacent steps per row."""
    gr = (math.sqrt(5) - 1) / 2
    a, b = np.zeros_like(h), 2 * h
    f = lambda d: np.abs(_F_of_state(m, rk4_step(rhs, 0.0, y_left, d[:, None])))
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        c_new, d_new = b - gr * (b - a), a + gr * (b - a)
        c, d = c_new, d_new
        fc, fd = f(c), f(d)
    delta = 0.5 * (a + b)
    y = rk4_step(rhs, 0.0, y_left, delta[:, None])
    return v_left + delta, y, _F_of_state(m, y)


def find_striction_numeric(spec, u_grid, v_range, n_coarse=N_COARSE, step=DEFAULT_STEP,
                           eps_root=EPS_ROOT, eps_touch=EPS_TOUCH):
    """All central points on each ruling over ``v_range``, grouped into branches.

    Sign changes of ``F`` are located on the integration nodes between
    ``n_coarse`` coarse samples and bisected inside one step.  Local
    minima of ``|F|`` below ``eps_touch`` without a sign change are
    reported as tangential roots.
    """
    _require_unit(spec)
    m = spec.metric
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    v0, v1 = map(float, v_range)
    coarse, fine = _fine_grid(v0, v1, n_coarse, step)
    b = spec.base(u)
    sw = integrate_rulings(m, b.alpha, b.Z, b.alpha_prime, b.W, fine, step)
    y = np.concatenate([sw.x, sw.xdot, sw.J, sw.DJ], axis=-1)
    nu, nv = sw.valid.shape
    F = np.full((nu, nv), np.nan)
    F[sw.valid] = _F_of_state(m, y[sw.valid])

    rhs = jacobi_rhs(m)
    # candidate intervals [j, j+1] with a sign change, oriented away from v = 0
    cand_i, cand_j = [], []
    exact = []
    for i in range(nu):
        Fi = F[i]
        for j in range(nv - 1):
            a, c = Fi[j], Fi[j + 1]
            if not (np.isfinite(a) and np.isfinite(c)):
                continue
            if a == 0.0:
                exact.append((i, j))
            elif a * c < 0:
                cand_i.append(i)
                cand_j.append(j)
        if np.isfinite(Fi[-1]) and Fi[-1] == 0.0:
            exact.append((i, nv - 1))

    roots = [[] for _ in range(nu)]
    if cand_i:
        ci, cj = np.array(cand_i), np.array(cand_j)
        # start from the node nearer the base so the step matches the sweep
        forward = fine[cj] >= 0
        start = np.where(forward, cj, cj + 1)
        h = fine[np.where(forward, cj + 1, cj)] - fine[start]
        vr, yr, Fr = _refine_crossings(m, rhs, fine[start], y[ci, start], h)
        for r in range(ci.size):
            roots[ci[r]].append(Root(float(vr[r]), float(Fr[r]), yr[r].copy()))
    for i, j in exact:
        roots[i].append(Root(float(fine[j]), 0.0, y[i, j].copy()))

    # tangential roots: local minima of |F| that do not straddle zero
    tan_i, tan_j = [], []
    absF = np.abs(F)
    for i in range(nu):
        a = absF[i]
        for j in range(1, nv - 1):
            if not np.all(np.isfinite(a[j - 1:j + 2])):
                continue
            if a[j] <= a[j - 1] and a[j] <= a[j + 1] and a[j] < eps_touch * 1e3:
                if F[i, j - 1] * F[i, j + 1] > 0 and F[i, j - 1] * F[i, j] > 0:
                    tan_i.append(i)
                    tan_j.append(j - 1)
    if tan_i:
        ti, tj = np.array(tan_i), np.array(tan_j)
        h = fine[tj + 1] - fine[tj]
        vr, yr, Fr = _refine_minimum(m, rhs, fine[tj], y[ti, tj], h)
        for r in range(ti.size):
            if abs(Fr[r]) < eps_touch:
                roots[ti[r]].append(Root(float(vr[r]), float(Fr[r]), yr[r].copy(), kind="tangential"))

    k = m.curvature
    verdicts = []
    for i in range(nu):
        rs = sorted(roots[i], key=lambda r: r.v)
        if k is not None and k > 0:
            rs = _reduce_periodic(rs, 2 * math.pi / math.sqrt(k))
        rs = _dedupe(rs)
        notes = []
        if sw.valid[i].sum() < nv:
            notes.append(f"ruling left the chart at v = {sw.exit_param[i]:.12g}; search truncated")
        finite = F[i][np.isfinite(F[i])]
        if finite.size and np.max(np.abs(finite)) < eps_root:
            verdicts.append(Verdict(float(u[i]), "degenerate", roots=[],
                                    diagnostics="; ".join(["|F| < eps_root on the whole ruling"] + notes)))
        elif rs:
            verdicts.append(Verdict(float(u[i]), "found", v=rs[0].v, roots=rs, diagnostics="; ".join(notes)))
        else:
            notes.insert(0, f"no sign change or touching zero of F on [{v0:g}, {v1:g}]")
            verdicts.append(Verdict(float(u[i]), "not_found", diagnostics="; ".join(notes)))
    return StrictionResult(verdicts=verdicts, branches=assemble_branches(verdicts))


def _reduce_periodic(rs, period):
    for r in rs:
        r.v = r.v % period
    return sorted(rs, key=lambda r: r.v)


def _dedupe(rs, tol=1e-7):
    out = []
    for r in rs:
        if out and abs(r.v - out[-1].v) < tol:
            continue
        out.append(r)
    return out


def assemble_branches(verdicts, max_jump=None):
    """Group roots of consecutive rulings into branches by nearest ``v``."""
    branches = []
    live = []  # (branch, last v)
    for vd in verdicts:
        vs = [r for r in vd.roots]
        used = set()
        new_live = []
        for br, last in live:
            best, best_d = None, math.inf
            for idx, r in enumerate(vs):
                d = abs(r.v - last)
                if idx not in used and d < best_d:
                    best, best_d = idx, d
            if best is not None and (max_jump is None or best_d <= max_jump):
                used.add(best)
                r = vs[best]
                br.u.append(vd.u)
                br.v.append(r.v)
                br.points.append(r.point)
                br.states.append(r.state)
                new_live.append((br, r.v))
        for idx, r in enumerate(vs):
            if idx not in used:
                br = Branch(branch_id=len(branches), u=[vd.u], v=[r.v], points=[r.point], states=[r.state])
                branches.append(br)
                new_live.append((br, r.v))
        live = new_live
    return branches


# ---------------------------------------------------------------------------
# hyperbolic non-existence


@dataclass
class ClassifierResult:
    u: np.ndarray
    no_striction: np.ndarray
    K_ext: np.ndarray
    kappa1: np.ndarray
    closed_form_not_found: np.ndarray

    @property
    def consistent(self):
        return np.array_equal(self.no_striction, self.closed_form_not_found)


def hyperbolic_nonexistence_classifier(spec, u_grid, k, eps_root=EPS_ROOT, eps_class=EPS_CLASS, hyp_tol=1e-6):
    """Decide per ``u`` whether the rulings carry no central point.

    Needs an arc-length base curve, a unit ruling field orthogonal to it and
    ``k < 0``.  The verdict is cross-checked against the closed form.
    """
    if not k < 0:
        raise HypothesisViolated("classifier applies to negative curvature only")
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    p = _pointwise(spec, u)
    b = p.base
    na = np.sqrt(inner(b.g, b.alpha_prime, b.alpha_prime))
    if np.max(np.abs(na - 1)) > hyp_tol:
        raise HypothesisViolated(f"base curve is not arc-length (max | |alpha'| - 1 | = {np.max(np.abs(na - 1)):.3g})")
    if np.max(np.abs(p.kappa0 - 1)) > hyp_tol:
        raise HypothesisViolated("ruling field is not unit")
    cross = np.abs(inner(b.g, b.alpha_prime, b.Z))
    if np.max(cross) > hyp_tol:
        raise HypothesisViolated(f"alpha' and Z are not orthogonal (max |g| = {np.max(cross):.3g})")
    rep = curvature_from_jets(spec.metric, b.alpha, b.alpha_prime, b.Z, b.W)
    K = rep.K_ext
    verdict = (np.abs(K) < eps_root) & (np.abs(p.kappa1 - math.sqrt(-k)) < eps_class)
    closed = np.array([v.kind == "not_found" for v in spaceform_striction_v(spec, u, k)])
    return ClassifierResult(u=u, no_striction=verdict, K_ext=K, kappa1=p.kappa1, closed_form_not_found=closed)


# ---------------------------------------------------------------------------
# re-basing on a striction branch


@dataclass
class RebasedData:
    """Sannia data of the surface re-based on a striction branch.

    ``phi`` is NaN where ``nabla_{s'} Z`` has no part orthogonal to ``Z``
    (the Sannia frame of the new base is undefined there);
    ``orthogonality`` is the unnormalized ``g(s'/|s'|, nabla_{s'} Z)``,
    which is defined everywhere.
    """

    u: np.ndarray
    phi: np.ndarray
    tangential: np.ndarray  # norm of the surface-tangent part of nabla_{s'} Z
    orthogonality: np.ndarray
    dZ_norm: np.ndarray
    frame_defined: np.ndarray


def rebase_on_branch(spec, branch, eps_gp=EPS_GP):
    """Sannia angle ``phi`` and tangential ``nabla_{s'} Z`` along a striction branch.

    The new base curve is ``s(u) = X(u, v*(u))`` with ruling ``X_v``; then
    ``s' = X_u + v*' X_v`` and ``nabla_{s'} Z = nabla_{X_v} X_u``.  The jets
    are the ones stored with the roots, so nothing is re-integrated.
    """
    u = np.asarray(branch.u, dtype=float)
    vs = np.asarray(branch.v, dtype=float)
    if u.size < 3:
        raise ValueError("branch too short to difference")
    dv = np.gradient(vs, u, edge_order=2)
    st = np.array(branch.states)
    pts, Xv, Xu, DXu = st[:, :3], st[:, 3:6], st[:, 6:9], st[:, 9:12]
    g = spec.metric.metric(pts)
    sp = Xu + dv[:, None] * Xv
    T = sp / np.sqrt(inner(g, sp, sp))[:, None]
    # X1 = Xv is unit, so the X1-free part of DXu spans X2
    w = DXu - inner(g, DXu, Xv)[:, None] * Xv
    wn = np.sqrt(inner(g, w, w))
    defined = wn > eps_gp
    with np.errstate(divide="ignore", invalid="ignore"):
        c2 = inner(g, T, w) / wn
    phi = np.where(defined, np.arcsin(np.clip(c2, -1, 1)), np.nan)
    # projection of DXu onto span(s', Xv)
    a11, a12, a22 = inner(g, sp, sp), inner(g, sp, Xv), inner(g, Xv, Xv)
    r1, r2 = inner(g, DXu, sp), inner(g, DXu, Xv)
    det = a11 * a22 - a12 * a12
    c_s = (a22 * r1 - a12 * r2) / det
    c_v = (a11 * r2 - a12 * r1) / det
    tang = c_s[:, None] * sp + c_v[:, None] * Xv
    return RebasedData(u=u, phi=phi, tangential=np.sqrt(inner(g, tang, tang)),
                       orthogonality=inner(g, T, DXu), dZ_norm=np.sqrt(inner(g, DXu, DXu)),
                       frame_defined=defined)
