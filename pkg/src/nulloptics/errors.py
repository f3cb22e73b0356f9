"""Exception types shared across the package."""


class NullOpticsError(ValueError):
    """Base class for all library errors."""


class EvaluationError(NullOpticsError):
    """A field evaluator returned a non-finite value."""


class SignatureError(NullOpticsError):
    """A metric has the wrong signature for the requested operation."""


class SymmetryError(NullOpticsError):
    """A declared symmetry (matrix symmetry or coordinate independence) fails."""


class InconsistentChargeError(NullOpticsError):
    """Off-diagonal metric components incompatible with a zero coupling."""


class SingularConformalError(NullOpticsError):
    """Conformal factor vanishes at a probed point."""


class NullConstraintError(NullOpticsError):
    """Initial velocity is not on the null cone."""


class NormalizationError(NullOpticsError):
    """Initial 4-velocity is not normalized for the chosen parametrization."""


class ProjectionError(NullOpticsError):
    """A path projection is degenerate (vanishing proper-time increment)."""


class SpacelikeSegmentError(NullOpticsError):
    """A path segment is spacelike where a timelike one is required."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(
            f"segment {index} is not timelike (squared length {value:.3e})"
        )


class ThresholdError(NullOpticsError):
    """Collision kinematics below the pair-creation threshold."""


class PseudoOrthogonalityError(NullOpticsError):
    """A 5x5 matrix does not preserve the flat metric diag(-1,1,1,1,1)."""


class ConfigError(NullOpticsError):
    """Invalid scenario configuration."""
