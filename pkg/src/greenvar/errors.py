"""Exception hierarchy.

Every error raised on purpose by the library derives from ``GreenvarError`` so
callers (the CLI in particular) can separate numerical failures from bugs.
"""


class GreenvarError(Exception):
    pass


class GeometryError(GreenvarError):
    """Invalid domain, or a geometric query that could not be answered."""


class DomainSpecError(GeometryError):
    """A serialized domain document is malformed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class QuadratureError(GreenvarError):
    pass


class DomainError(GreenvarError):
    """A point that must lie inside the domain does not."""


class SingularityError(GreenvarError):
    """Evaluation exactly at a kernel singularity."""


class KernelError(GreenvarError):
    """Green data could not be computed (e.g. MFS fit failed)."""


class ShapeError(GreenvarError):
    """Field samples live on a different quadrature rule than expected."""


class EpsilonRangeError(GreenvarError):
    pass


class InputError(GreenvarError):
    pass


class FitError(GreenvarError):
    pass


class BoundViolation(GreenvarError):
    """A proven inequality failed numerically; indicates a discretization fault."""


class GrowthSignError(GreenvarError):
    pass


class TopologyError(GreenvarError):
    pass


class OracleError(GreenvarError):
    pass
