"""Exception and warning types shared across the package."""

from __future__ import annotations


class IsospecError(Exception):
    """Base class for all package-specific failures."""


class BrokenSupersymmetryError(IsospecError):
    """Raised when a mode that must be nodeless turns out to have nodes."""


class EigensolverError(IsospecError):
    """Eigen decomposition failed or did not meet the residual contract."""

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message if detail is None else f"{message} ({detail})")
        self.detail = detail


class WindowTooSmallError(IsospecError):
    """The trusted window is too narrow for the requested operation."""


class SingularParameterError(IsospecError, ValueError):
    """A deformation parameter makes a denominator vanish on the grid.

    Carries the offending parameter, the numerically computed excluded
    interval, the grid location where the denominator crosses zero (when one
    exists), and the chain step index for multi-parameter constructions.
    """

    def __init__(
        self,
        message: str,
        *,
        lam: float | None = None,
        interval: tuple[float, float] | None = None,
        x_crossing: float | None = None,
        step_index: int | None = None,
    ):
        super().__init__(message)
        self.lam = lam
        self.interval = interval
        self.x_crossing = x_crossing
        self.step_index = step_index


class AbrahamMosesLimitError(SingularParameterError):
    """Parameter sits at the lower endpoint of the excluded interval."""


class PurseyLimitError(SingularParameterError):
    """Parameter sits at the upper endpoint of the excluded interval."""


class TableFormatError(IsospecError, ValueError):
    """A tabulated-potential file is malformed; line_number is 1-based."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class QuadratureWarning(UserWarning):
    """Whole-domain quadrature fell back from Simpson to trapezoid."""


class DomainTruncationWarning(UserWarning):
    """The computational box visibly truncates a wavefunction tail."""
