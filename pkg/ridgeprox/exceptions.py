"""
Exception hierarchy for ridgeprox
"""
from typing import Optional


class RidgeProxError(Exception):
    """Base class for every error raised by ridgeprox"""


class InvalidDirectionError(RidgeProxError, ValueError):
    """Zero direction vector or a dependent pair of directions"""


class DimensionMismatchError(RidgeProxError, ValueError):
    """Vectors of different lengths were combined"""


class InvalidPointSetError(RidgeProxError, ValueError):
    """Empty, ragged or duplicated point data"""


class InvalidPathError(RidgeProxError, ValueError):
    """A point sequence is not an alternating path"""

    def __init__(self, message: str, position: Optional[int] = None):
        super().__init__(message)
        self.position = position


class InterpolationError(RidgeProxError, ValueError):
    """No exact ridge-sum interpolant exists along the given path"""

    def __init__(self, message: str, alternating_sum=None):
        super().__init__(message)
        self.alternating_sum = alternating_sum


class NotRidgeFieldError(RidgeProxError, ValueError):
    """Field is not constant on the fibers of the first direction"""


class EnumerationGuardError(RidgeProxError, ValueError):
    """Exhaustive closed-path enumeration refused for a large instance"""


class UnboundedProblemError(RidgeProxError, ArithmeticError):
    """Simplex found an unbounded direction"""


class ReproductionError(RidgeProxError):
    """A reproduced construction failed its own consistency check"""


class InputDocumentError(RidgeProxError, ValueError):
    """Malformed input document; `where` names the field or line"""

    def __init__(self, message: str, where: Optional[str] = None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where
