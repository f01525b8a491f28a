"""Exception hierarchy for ruled-surface computations."""


class GeometryError(Exception):
    """Base class for geometric failures at runtime."""


class PointOutsideDomain(GeometryError):
    pass


class SingularMetric(GeometryError):
    pass


class DegeneratePlane(GeometryError):
    pass


class RankDeficientPlane(DegeneratePlane):
    pass


class LeftChartDomain(GeometryError):
    """Raised when an integration leaves the chart and no partial result is wanted."""

    def __init__(self, message, exit_param=None):
        super().__init__(message)
        self.exit_param = exit_param


class DegenerateSpec(GeometryError):
    """Base curve not regular or ruling vanishing."""


class NotGeneralPosition(GeometryError):
    def __init__(self, message, u=None):
        super().__init__(message)
        self.u = u


class NonPositiveKappa1(GeometryError):
    pass


class HypothesisViolated(GeometryError):
    pass


class ChartSingularity(GeometryError):
    pass


class ScenarioError(ValueError):
    """Invalid scenario file."""
