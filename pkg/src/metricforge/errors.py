"""Exception and warning types shared across the package."""


class MetricForgeError(Exception):
    """Base class for all package errors."""


class DimensionError(MetricForgeError, ValueError):
    pass


class SymmetryError(MetricForgeError, ValueError):
    pass


class RankDeficiencyError(MetricForgeError):
    """Vectors that must be linearly independent are not (numerically)."""


class CapacityError(MetricForgeError, ValueError):
    pass


class EpsilonTooLargeError(MetricForgeError, ValueError):
    """Neighborhood radius violates the disjoint-ball requirement."""


class NoiseMagnitudeError(MetricForgeError, ValueError):
    pass


class DuplicatePointsError(MetricForgeError, ValueError):
    pass


class IncompleteSpecError(MetricForgeError, ValueError):
    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(f"({i + 1},{j + 1})" for i, j in self.missing[:20])
        more = "" if len(self.missing) <= 20 else f" and {len(self.missing) - 20} more"
        super().__init__(f"distance spec is missing pairs: {shown}{more}")


class NumericalFailure(MetricForgeError):
    """Non-finite values showed up somewhere in the pipeline.

    ``stage`` names the pipeline step that produced them.
    """

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class ConditioningWarning(UserWarning):
    """Eigenvalue spread of a constructed form exceeds the configured threshold."""

    def __init__(self, spread: float, threshold: float):
        self.spread = spread
        self.threshold = threshold
        super().__init__(
            f"eigenvalue spread {spread:.3e} exceeds threshold {threshold:.1e}; "
            "realized distances may be inaccurate"
        )
