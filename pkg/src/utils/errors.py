"""Exception hierarchy shared by the bounds toolkit."""

from typing import List, Optional


class BoundsError(Exception):
    """Base class for all toolkit errors."""
    pass


class NotPSDError(BoundsError):
    """Raised when a matrix that must be positive semidefinite is not."""
    pass


class SingularFimError(BoundsError):
    """Raised when an information matrix cannot be inverted (unlocalizable node)."""
    pass


class DegenerateInputError(BoundsError):
    """Raised when an ellipse or scale is too degenerate for the requested metric."""
    pass


class IllConditionedSubtractionError(BoundsError):
    """Raised when F1 - F2 is not positive definite."""
    pass


class BelowReferenceDistanceError(BoundsError):
    """Raised when a source-anchor distance falls below the reference distance d0."""

    def __init__(
        self,
        distance: float,
        d0: float,
        source_id: Optional[str] = None,
        anchor_id: Optional[str] = None
    ):
        self.distance = distance
        self.d0 = d0
        self.source_id = source_id
        self.anchor_id = anchor_id
        pair = ""
        if source_id is not None or anchor_id is not None:
            pair = f" for source '{source_id}' and anchor '{anchor_id}'"
        super().__init__(
            f"Distance {distance:.6g} m is below reference distance d0={d0:.6g} m{pair}"
        )


class SingularBlockError(BoundsError):
    """Raised when a block that must be inverted during marginalization is singular."""
    pass


class EmptyParameterVectorError(BoundsError):
    """Raised when a scenario has no unknown position to estimate."""
    pass


class PreconditionViolationError(BoundsError):
    """Raised when a closed-form specialization is applied to the wrong scenario shape."""
    pass


class ScenarioParseError(BoundsError):
    """Raised when a scenario document is not well-formed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}, column {column})"
        super().__init__(f"{message}{location}")


class ScenarioValidationError(BoundsError):
    """Raised with every field-level problem found in a scenario document."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__(
            f"Scenario has {len(self.errors)} validation error(s):\n  "
            + "\n  ".join(self.errors)
        )


class UnknownParameterPathError(BoundsError):
    """Raised when a sweep axis does not resolve to a scenario field."""
    pass


class UnknownNodeIdError(BoundsError):
    """Raised when a node id is not present in a scenario or report."""
    pass


class InsufficientConvergenceError(BoundsError):
    """Raised when too many Monte-Carlo estimator runs fail to converge."""

    def __init__(self, failed: int, trials: int, floor: float):
        self.failed = failed
        self.trials = trials
        self.floor = floor
        super().__init__(
            f"{failed} of {trials} estimator runs did not converge "
            f"(required convergence rate {floor:.0%})"
        )
