"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`MetricTreesError`; the CLI maps these to exit code 2 and a
machine-readable error object (see :meth:`MetricTreesError.to_dict`).
"""


class MetricTreesError(Exception):
    """Base class. ``details`` is a JSON-friendly dict of offending data."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"type": type(self).__name__, "message": str(self), **self.details}


class InvalidMetric(MetricTreesError, ValueError):
    """A matrix failed validation. ``violations`` lists every failed axiom."""

    def __init__(self, message, violations=(), **details):
        super().__init__(message, **details)
        self.violations = list(violations)

    def to_dict(self):
        d = super().to_dict()
        d["violations"] = self.violations
        return d


class NotSquare(InvalidMetric):
    pass


class NonFiniteEntry(InvalidMetric):
    pass


class NegativeEntry(InvalidMetric):
    pass


class NonzeroDiagonal(InvalidMetric):
    pass


class AsymmetricInput(InvalidMetric):
    pass


class CoincidentPoints(InvalidMetric):
    pass


class TriangleViolation(InvalidMetric):
    pass


class InvalidGraph(MetricTreesError, ValueError):
    pass


class DisconnectedGraph(InvalidGraph):
    pass


class ParameterOutOfRange(MetricTreesError, ValueError):
    pass


class EmptySetDiameter(MetricTreesError, ValueError):
    pass


class NegativeTripod(MetricTreesError, ValueError):
    pass


class GeodesicEnumerationCapExceeded(MetricTreesError):
    """Raised in exhaustive geodesic mode; ``partial`` holds the result so far."""

    def __init__(self, message, partial=None, **details):
        super().__init__(message, **details)
        self.partial = partial


class EmptyIntersection(MetricTreesError, ValueError):
    pass


class LoopNotClosed(MetricTreesError, ValueError):
    pass


class DomainTooSmall(MetricTreesError, ValueError):
    pass


class InvalidSpec(MetricTreesError, ValueError):
    pass


class PerturbationBrokeMetric(MetricTreesError):
    pass


class LipschitzViolation(MetricTreesError, ValueError):
    pass
