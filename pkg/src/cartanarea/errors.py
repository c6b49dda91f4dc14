"""Exception types shared across the package."""


class CartanAreaError(Exception):
    """Base class for computational errors raised by this package."""


class SingularChart(CartanAreaError):
    """Plane not representable in the beta-positive graph chart."""


class NonFinite(CartanAreaError):
    """A value or derivative evaluated to NaN or infinity."""


class DomainError(CartanAreaError):
    """Input outside the admissible domain of an operation."""


class DimensionMismatch(CartanAreaError):
    """Vector or matrix dimensions inconsistent with the operation."""


class BadIndices(CartanAreaError):
    """Component indices not strictly increasing or out of range."""


class NegativeGram(CartanAreaError):
    """Gram determinant came out negative; metric is not positive definite."""


class NotPositiveDefinite(CartanAreaError):
    """A metric required to be positive definite is not."""


class NoConvergence(CartanAreaError):
    """Iterative solver failed to reach the requested tolerance."""


class SingularJacobian(CartanAreaError):
    """Newton system was singular and the descent fallback also failed."""


class NotCritical(CartanAreaError):
    """Graph does not satisfy the discrete Euler-Lagrange tolerance."""


class ChartExit(CartanAreaError):
    """Deformed boundary left the graph chart (beta-positivity lost)."""


class DegenerateFrameWarning(UserWarning):
    """A diagonal frame entry vanished; the frame vectors may be dependent."""
