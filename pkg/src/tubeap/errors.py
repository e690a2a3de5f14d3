"""Exception types shared across the package."""


class TubeApError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(TubeApError):
    pass


class EmptyGenerators(TubeApError):
    pass


class ZeroGenerator(TubeApError):
    pass


class NotPointed(TubeApError):
    pass


class DegenerateSpan(TubeApError):
    pass


class UnsupportedDimension(TubeApError):
    pass


class EmptySet(TubeApError):
    pass


class EmptySpectrum(TubeApError):
    pass


class OverflowGuard(TubeApError):
    """Exponent out of double range: the point lies outside the safe tube."""


class BadGrid(TubeApError):
    pass


class CollidingFrequencies(TubeApError):
    """Two frequencies project to the same 1-D frequency along the chosen ray."""

    def __init__(self, msg, pair=None):
        super().__init__(msg)
        self.pair = pair


class NotFound(TubeApError):
    pass


class AllClipped(TubeApError):
    pass


class StepTooSmall(TubeApError):
    """Finite-difference signal below noise while noise itself is too large."""


class ZeroOnPath(TubeApError):
    pass


class NotNegative(TubeApError):
    pass


class BoundaryZeroPersistent(TubeApError):
    pass


class BudgetExhausted(TubeApError):
    pass


class ConfigError(TubeApError):
    """Invalid run configuration; message names the offending path."""
