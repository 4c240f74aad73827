"""Exception hierarchy shared by all modules."""


class EnclosureError(Exception):
    """Base class for errors raised by this package."""


class GeometryError(EnclosureError, ValueError):
    pass


class NonRegularDirection(GeometryError):
    pass


class DegenerateCone(GeometryError):
    pass


class CollinearInput(GeometryError):
    pass


class EmptyIntersection(GeometryError):
    pass


class InsufficientDirections(GeometryError):
    pass


class DegeneratePolygon(GeometryError):
    pass


class DomainError(EnclosureError, ValueError):
    """Special function evaluated outside its domain."""


class OriginEvaluation(EnclosureError, ValueError):
    pass


class UnsupportedOrder(EnclosureError, ValueError):
    pass


class EvaluationInsideSource(EnclosureError, ValueError):
    pass


class ClearanceViolation(EnclosureError, ValueError):
    pass


class WavenumberMismatch(EnclosureError, ValueError):
    pass


class UnderResolvedRule(EnclosureError, ValueError):
    pass


class InsufficientSamples(EnclosureError, ValueError):
    pass


class SaturatedSamples(EnclosureError, ValueError):
    pass


class ContractionViolated(EnclosureError, ArithmeticError):
    pass


class MaxIterationsExceeded(EnclosureError, ArithmeticError):
    pass


class ConfigInvalid(EnclosureError, ValueError):
    pass


class MissingInput(EnclosureError, FileNotFoundError):
    pass
