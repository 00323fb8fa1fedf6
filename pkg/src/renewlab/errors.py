"""Error types shared across the package.

Plain ValueError is used for domain errors (bad arguments); the classes here
carry diagnostic payload for failures that are numerical or resource-shaped.
"""

from __future__ import annotations


class NumericalError(RuntimeError):
    """A quadrature or series evaluation failed to reach its tolerance.

    Attributes
    ----------
    achieved : float
        The error estimate actually reached before giving up.
    requested : float
        The tolerance that was asked for.
    """

    def __init__(self, message: str, achieved: float, requested: float):
        super().__init__(f"{message} (achieved {achieved:.3e}, requested {requested:.3e})")
        self.achieved = achieved
        self.requested = requested


class ResourceError(RuntimeError):
    """A computation refused to proceed at the requested size.

    ``suggested`` carries the size that would have been acceptable: an
    upper bound for state-space caps, a lower bound for sample budgets.
    The message spells out which direction applies.
    """

    def __init__(self, message: str, suggested: int | None = None):
        super().__init__(message)
        self.suggested = suggested


class NonReturnError(RuntimeError):
    """An orbit failed to return to the inducing set within the cap."""

    def __init__(self, cap: int, x: float):
        super().__init__(f"no return to [1/2,1] within {cap} iterations from x={x!r}")
        self.cap = cap
        self.x = x


class EmptyWindowError(ValueError):
    """A grid window contains no summands; flagged rather than returning 0."""

    def __init__(self, message: str):
        super().__init__(message)
