"""Exception types shared across the package."""


class XtremError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(XtremError):
    """A value violates a structural invariant (bad counts, labels, config)."""


class DomainError(XtremError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class InsufficientDataError(XtremError):
    """Too few observations to attempt a fit."""


class ConsistencyError(XtremError):
    """Internally inconsistent inputs, e.g. observations misaligned with a segmentation."""


class FitError(XtremError):
    """Optimization could not be started or carried out."""


class ClampedQuantileWarning(UserWarning):
    """A tail quantile exceeded 1 and was clamped to the proportion scale."""
