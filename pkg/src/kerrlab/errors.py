"""Exception types shared across kerrlab modules."""


class KerrlabError(Exception):
    """Base class for all kerrlab errors."""


class DomainError(KerrlabError):
    """A chart point lies outside the admissible domain (exterior, axis guard, ...)."""


class ChartMismatchError(KerrlabError):
    """Tensor and metric live in different charts."""


class CalibrationError(KerrlabError):
    """An internal self-check of a closed-form object failed (wrong ansatz or constant)."""


class StabilityError(KerrlabError):
    """A CFL bound was violated or NaN/Inf appeared during evolution."""


class GuardBandError(KerrlabError):
    """A boundary eigenvalue fell inside the undecidable guard band around zero."""
