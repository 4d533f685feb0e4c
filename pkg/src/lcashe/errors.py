"""Exception hierarchy shared by all engines."""


class SheError(Exception):
    """Base class for every failure raised by lcashe."""


class NumericFailure(SheError):
    """A computation could not produce a trustworthy number (CLI exit 3)."""


class NonFinite(NumericFailure):
    """A dual integral diverges; typically Dalang's condition fails."""


class OutOfRange(NumericFailure):
    """A target value lies outside the range searched by an inversion."""


class GridTooCoarse(NumericFailure):
    """Halving the time step moved the answer by more than the tolerance."""


class Unstable(NumericFailure):
    """A simulated path crossed the overflow guard."""


class ResolutionError(NumericFailure):
    """A heat kernel came out negative beyond tolerance: refine the grid."""


class NotLinear(SheError):
    """The exact moment identity needs a linear sigma."""


class NotDiscrete(SheError):
    """The operation needs a finite discrete group."""


class NotAutomorphism(SheError):
    """The map is not an automorphism of the configured group."""


class HypothesisViolated(SheError):
    """Preconditions of a bound do not hold for the given inputs."""


class TooFewPoints(SheError):
    """Not enough usable sweep points to fit an index."""


class IncompatibleMap(SheError):
    """An isomorphism descriptor does not match its source/target groups."""


class ConfigError(SheError):
    """Invalid experiment configuration (CLI exit 2)."""
