"""Exception hierarchy shared by all mmtrace modules.

The CLI maps these onto exit codes: ParameterError and its subclasses
exit with 2, ResolutionError (including InsufficientData) with 3,
IoError with 4.
"""


class MMTraceError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(MMTraceError):
    """A supplied parameter is outside its admissible range."""


class InvalidPoint(ParameterError):
    """A point id does not exist in the space."""


class EmptySet(ParameterError):
    """An operation that needs a nonempty set received an empty one."""


class InvalidScale(ParameterError):
    """A scale/radius argument is nonpositive or otherwise meaningless."""


class InvalidGrid(ParameterError):
    """A radius grid is empty or malformed."""


class InvalidParameter(ParameterError):
    """Generic inadmissible parameter (sigma, theta ordering, ...)."""


class MissingMetadata(ParameterError):
    """A mode was requested that needs generator metadata the input lacks."""


class InvalidPair(ParameterError):
    """A point pair lies outside the required proximity set."""


class InvalidFamily(ParameterError):
    """A ball family violates the disjoint/size/contact conditions."""


class ZeroMass(MMTraceError):
    """A ball with zero mass reached a weight computation."""


class ResolutionError(MMTraceError):
    """A requested scale lies below the discretization floor."""


class InsufficientData(ResolutionError):
    """Too few samples/scales to produce the requested estimate."""


class IoError(MMTraceError):
    """A file could not be read, parsed, or written."""
