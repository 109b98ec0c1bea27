"""Exception hierarchy shared by every module."""


class CredalError(Exception):
    """Base class for all errors raised by credalnet."""


class ModelError(CredalError):
    """A network or query violates a structural invariant."""


class InfeasibleSpecError(CredalError):
    """A constraint-form credal set is empty."""


class UnsupportedConversionError(CredalError):
    """A constraint-form spec cannot be turned into vertices."""


class LeakViolationError(CredalError):
    """Cumulative-synergy leak interval exceeds the smallest link."""


class EmptyCombinationError(CredalError):
    """A combination function with no identity received no arguments."""


class UnboundVariableError(CredalError):
    """A formula mentions a logical variable that nothing binds."""


class GroundingError(CredalError):
    """Grounding request is malformed (unknown relation, bad arity, ...)."""


class PreconditionError(CredalError):
    """An inference method cannot run on the given network."""


class TopologyError(PreconditionError):
    """Method requires a polytree and got a multiply connected network."""


class TooLargeError(CredalError):
    """Enumeration or resource budget exceeded."""


class ZeroProbabilityEvidenceError(CredalError):
    """Conditioning event has (upper) probability zero."""


class InconsistentConstraintsError(CredalError):
    """Linear relaxation is infeasible at the root node."""


class FormatError(CredalError):
    """Input file is not well-formed JSON of the expected shape."""
