"""Exception hierarchy.

Everything derives from :class:`MVError` (itself a ``ValueError``) so callers
can catch the family at once. Advisories are not exceptions; they travel in
reports.
"""


class MVError(ValueError):
    """Base class for all package errors."""


class IngestError(MVError):
    """Raised for malformed CSV input or tag manifests."""


class HierarchyError(MVError):
    """Tag set violates the site -> equip -> point hierarchy."""


class ZeroVarianceError(MVError):
    """A column has no spread, so a correlation or scaling is undefined."""


class RankDeficientError(MVError):
    """Design matrix is rank deficient; the least-squares fit is not unique."""


class InsufficientDataError(MVError):
    """Too few observations for the requested statistic or fit."""


class FitError(MVError):
    """A model failed to train (non-finite loss, solver non-convergence)."""


class FrequencyError(MVError):
    """Unsupported or incompatible measurement frequency."""


class StageError(MVError):
    """A pipeline stage failed; carries the stage name and a remedy hint."""

    def __init__(self, stage, message, hint=None):
        self.stage = stage
        self.hint = hint
        text = f"[{stage}] {message}"
        if hint:
            text += f" (hint: {hint})"
        super().__init__(text)
