"""Exception hierarchy.  Validation failures derive from ``ValueError``."""


class SoftCoveringError(Exception):
    """Base class for every error raised by this package."""


class ChannelError(SoftCoveringError, ValueError):
    """Invalid channel description.

    ``field`` names the offending part ("input_dist" or "transition") and
    ``row`` the transition row, when known, so file loaders can point at it.
    """

    def __init__(self, message, field=None, row=None):
        self.field = field
        self.row = row
        super().__init__(message)


class NonStochastic(ChannelError):
    pass


class DimensionMismatch(ChannelError):
    pass


class EmptyAlphabet(ChannelError):
    pass


class ChannelFileError(ChannelError):
    """Channel file could not be parsed; ``lineno`` points into the file."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        self.field = None
        self.row = None
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        Exception.__init__(self, f"{where} {message}" if where else message)


class RateBelowMI(SoftCoveringError, ValueError):
    def __init__(self, rate, mutual_information):
        self.rate = rate
        self.mutual_information = mutual_information
        super().__init__(
            f"rate {rate:.17g} nats must exceed I(X;Y) = {mutual_information:.17g} nats"
        )


class TauAtBoundary(SoftCoveringError):
    pass


class NoConvergence(SoftCoveringError):
    def __init__(self, message, best_value=None, sweeps=None):
        self.best_value = best_value
        self.sweeps = sweeps
        super().__init__(message)


class SupportOverflow(SoftCoveringError):
    pass


class MemoryCap(SoftCoveringError):
    def __init__(self, message, n=None):
        self.n = n
        super().__init__(message)


class EmptyCodebook(SoftCoveringError, ValueError):
    pass


class AbsoluteContinuityViolation(SoftCoveringError):
    pass


class InvalidMoments(SoftCoveringError, ValueError):
    pass


class NonPositiveMean(SoftCoveringError, ValueError):
    pass
