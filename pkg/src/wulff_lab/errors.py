"""Exception types shared across the package."""


class WulffLabError(Exception):
    """Base class for all package errors."""


class DegenerateInput(WulffLabError):
    """Point set or body is not full-dimensional."""


class DimensionMismatch(WulffLabError):
    """Operands live in different ambient dimensions."""


class MethodUnavailable(WulffLabError):
    """Requested method cannot run (e.g. exact volume above the dimension cap)."""


class ZeroDirection(WulffLabError):
    """Support function queried with the zero vector."""


class SingularMatrix(WulffLabError):
    """Affine map with (numerically) vanishing determinant."""


class NegativeEntry(WulffLabError):
    """Mean inequalities require nonnegative inputs."""


class OutOfRangeEntry(WulffLabError):
    """Input outside the domain on which the inequality is proven."""


class EllipsoidNotConverged(WulffLabError):
    """Enclosing-ellipsoid iteration hit its round cap before reaching tolerance."""


class SampleBudgetExceeded(WulffLabError):
    """Requested more transport samples than the exact assignment solver allows."""


class OutOfRegime(WulffLabError):
    """Eigenvalue chain evaluated outside the smallness regime; refusing."""


class NotTwoDimensional(WulffLabError):
    """Operation is implemented for planar bodies only."""


class NotCentrallySymmetric(WulffLabError):
    """Symmetric-constant mode requires a centrally symmetric body."""


class MalformedBodyFile(WulffLabError):
    """Body file is unreadable or fails the schema/full-dimensionality checks."""
