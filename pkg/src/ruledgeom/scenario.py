"""Scenario files: strict JSON descriptions of a metric, a surface and grids."""

import json
import math
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ScenarioError
from .manifold import euclidean, hyperbolic_halfspace, product_revolution, sphere, warped
from .profiles import TrigPoly
from .ruled_surface import RuledSurfaceSpec

SCENARIO_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Profile(_Strict):
    """``sum(poly[i] t^i) + sum(a sin(w t + c))``."""

    poly: list[float] = []
    trig: list[tuple[float, float, float]] = []

    def build(self):
        return TrigPoly(poly=tuple(self.poly), trig=tuple(self.trig))


Vec3 = tuple[float, float, float]


class EuclideanMetric(_Strict):
    preset: Literal["euclidean"]


class SphereMetric(_Strict):
    preset: Literal["sphere"]
    k: float = Field(1.0, gt=0)


class HalfspaceMetric(_Strict):
    preset: Literal["halfspace"]
    k: float = Field(-1.0, lt=0)


class ProductRevolutionMetric(_Strict):
    preset: Literal["product_revolution"]
    profile: Profile


class WarpedMetric(_Strict):
    preset: Literal["warped"]
    profile: Profile


MetricConfig = Annotated[Union[EuclideanMetric, SphereMetric, HalfspaceMetric, ProductRevolutionMetric,
                               WarpedMetric], Field(discriminator="preset")]


class LineCurve(_Strict):
    preset: Literal["line"]
    point: Vec3
    direction: Vec3


class CircleCurve(_Strict):
    """``center + radius (cos(w u) e1 + sin(w u) e2)``."""

    preset: Literal["circle"]
    center: Vec3 = (0.0, 0.0, 0.0)
    radius: float = Field(gt=0)
    e1: Vec3 = (1.0, 0.0, 0.0)
    e2: Vec3 = (0.0, 1.0, 0.0)
    rate: float = 1.0


class HelixCurve(_Strict):
    """``(r cos u, r sin u, pitch u)`` shifted by ``center``."""

    preset: Literal["helix"]
    radius: float = Field(gt=0)
    pitch: float
    center: Vec3 = (0.0, 0.0, 0.0)


class CustomCurve(_Strict):
    preset: Literal["custom"]
    components: tuple[Profile, Profile, Profile]


CurveConfig = Annotated[Union[LineCurve, CircleCurve, HelixCurve, CustomCurve], Field(discriminator="preset")]


class ConstantRuling(_Strict):
    preset: Literal["constant"]
    vector: Vec3


class TangentRuling(_Strict):
    preset: Literal["tangent"]


class CustomRuling(_Strict):
    preset: Literal["custom"]
    components: tuple[Profile, Profile, Profile]


RulingConfig = Annotated[Union[ConstantRuling, TangentRuling, CustomRuling], Field(discriminator="preset")]


class SurfaceConfig(_Strict):
    base: CurveConfig
    ruling: RulingConfig
    normalize_ruling: bool = True
    u_domain: Optional[tuple[float, float]] = None


class Axis(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1)

    @model_validator(mode="after")
    def _finite(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid bounds must be finite")
        return self

    def values(self):
        return np.linspace(self.start, self.stop, self.num)


class Grids(_Strict):
    u: Axis
    v: Axis


class StrictionConfig(_Strict):
    v_range: Optional[tuple[float, float]] = None
    n_coarse: int = Field(64, ge=2)


class ReconstructConfig(_Strict):
    u0: Optional[float] = None
    u_range: Optional[tuple[float, float]] = None
    invariants_csv: Optional[str] = None


class Tolerances(_Strict):
    eps_root: float = Field(1e-10, gt=0)
    eps_touch: float = Field(1e-7, gt=0)
    eps_gp: float = Field(1e-7, gt=0)
    eps_class: float = Field(1e-6, gt=0)
    eps_reg: float = Field(1e-8, gt=0)


class Scenario(_Strict):
    version: Literal[1]
    name: str
    description: str = ""
    metric: MetricConfig
    surface: SurfaceConfig
    grids: Grids
    step: float = Field(1e-3, gt=0)
    striction: StrictionConfig = StrictionConfig()
    reconstruct: ReconstructConfig = ReconstructConfig()
    outputs: list[Literal["mesh", "curvature", "invariants", "striction", "reconstruct"]] = []
    tolerances: Tolerances = Tolerances()


# ---------------------------------------------------------------------------
# loading


def bundled_names():
    root = resources.files("ruledgeom") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _read_text(ref):
    path = Path(ref)
    if path.is_file():
        return path.read_text()
    root = resources.files("ruledgeom") / "scenarios"
    cand = root / (ref if ref.endswith(".json") else ref + ".json")
    if cand.is_file():
        return cand.read_text()
    raise ScenarioError(f"no scenario file or bundled scenario named {ref!r} "
                        f"(bundled: {', '.join(bundled_names())})")


def parse_scenario(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        raise ScenarioError(f"invalid scenario:\n{exc}") from exc


def load_scenario(ref):
    """Load a scenario from a path or a bundled name."""
    return parse_scenario(_read_text(str(ref)))


# ---------------------------------------------------------------------------
# building


def build_metric(cfg):
    if isinstance(cfg, EuclideanMetric):
        return euclidean()
    if isinstance(cfg, SphereMetric):
        return sphere(cfg.k)
    if isinstance(cfg, HalfspaceMetric):
        return hyperbolic_halfspace(cfg.k)
    if isinstance(cfg, ProductRevolutionMetric):
        return product_revolution(cfg.profile.build())
    return warped(cfg.profile.build())


def _components(profiles):
    fs = [p.build() for p in profiles]

    def at(n):
        return lambda u: np.stack([f(u, n) for f in fs], axis=-1)

    return at


def _curve(cfg):
    """``at(n)`` returning the ``n``-th derivative of the curve as a callback."""
    if isinstance(cfg, LineCurve):
        p, d = np.array(cfg.point), np.array(cfg.direction)

        def at(n):
            def f(u):
                u = np.asarray(u, dtype=float)
                if n == 0:
                    return p + np.multiply.outer(u, d)
                return np.multiply.outer(np.ones_like(u) if n == 1 else np.zeros_like(u), d)
            return f

        return at
    if isinstance(cfg, CircleCurve):
        c, e1, e2 = map(np.array, (cfg.center, cfg.e1, cfg.e2))
        r, w = cfg.radius, cfg.rate

        def at(n):
            def f(u):
                u = np.asarray(u, dtype=float)
                cs = w**n * np.cos(w * u + n * np.pi / 2)
                sn = w**n * np.sin(w * u + n * np.pi / 2)
                out = r * (np.multiply.outer(cs, e1) + np.multiply.outer(sn, e2))
                return out + c if n == 0 else out
            return f

        return at
    if isinstance(cfg, HelixCurve):
        r, h = cfg.radius, cfg.pitch
        comps = (Profile(poly=[cfg.center[0]], trig=[(r, 1.0, math.pi / 2)]),
                 Profile(poly=[cfg.center[1]], trig=[(r, 1.0, 0.0)]),
                 Profile(poly=[cfg.center[2], h]))
        return _components(comps)
    return _components(cfg.components)


def build_spec(sc):
    """The :class:`RuledSurfaceSpec` described by a scenario."""
    m = build_metric(sc.metric)
    s = sc.surface
    alpha = _curve(s.base)
    if isinstance(s.ruling, ConstantRuling):
        vec = np.array(s.ruling.vector)
        Z = lambda u: np.multiply.outer(np.ones_like(np.asarray(u, dtype=float)), vec)
        dZ = lambda u: np.zeros(np.shape(u) + (3,))
    elif isinstance(s.ruling, TangentRuling):
        Z, dZ = alpha(1), alpha(2)
    else:
        at = _components(s.ruling.components)
        Z, dZ = at(0), at(1)
    dom = s.u_domain or (-math.inf, math.inf)
    return RuledSurfaceSpec(m, alpha(0), Z, alpha_prime=alpha(1), ruling_prime=dZ, u_domain=dom,
                            normalize_ruling=s.normalize_ruling, eps_reg=sc.tolerances.eps_reg, name=sc.name)


def with_step(sc, step):
    return sc if step is None else sc.model_copy(update={"step": float(step)})
