"""Ruled surfaces in Riemannian 3-manifolds given by a single chart.

The main entry points are re-exported here; see the submodules for the
lower-level pieces.
"""

__version__ = "0.1.0"

from .errors import (ChartSingularity, DegeneratePlane, DegenerateSpec, GeometryError, HypothesisViolated,
                     LeftChartDomain, NonPositiveKappa1, NotGeneralPosition, PointOutsideDomain,
                     RankDeficientPlane, ScenarioError, SingularMetric)
from .geodesic import exp_map, integrate_jacobi, parallel_transport
from .manifold import (ChartMetric, christoffel_at, euclidean, hyperbolic_halfspace, product_revolution,
                       riemann_at, sectional_curvature, space_form, sphere, warped)
from .oracles import SpaceFormTag, oracle_geodesic, oracle_jacobi_norm
from .profiles import TrigPoly
from .reconstruction import InvariantPrescription, prescription_from_table, reconstruct
from .ruled_surface import RuledSurfaceSpec, arc_length_spec, curvature_grid, curvature_report, evaluate_jet, ruling_sweep
from .sannia import is_general_position, sannia_frame_at, sannia_invariants
from .scenario import build_spec, load_scenario
from .striction import (evaluate_F, find_striction_numeric, hyperbolic_nonexistence_classifier,
                        rebase_on_branch, spaceform_coefficients, spaceform_striction_v)

__all__ = [name for name in dir() if not name.startswith("_")]
