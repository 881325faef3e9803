"""Exception hierarchy shared by the evaluation and recovery modules."""


class BeattyError(Exception):
    """Base class for every error raised by this package."""


class PrecisionLimitExceeded(BeattyError):
    """Working precision would exceed the configured cap."""


class AmbiguityError(BeattyError):
    """A floor could not be certified at the precision cap."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ParseError(BeattyError, ValueError):
    """Malformed expression text; ``position`` is the 0-based offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class NonIntegerResult(BeattyError):
    pass


class RecoveryError(BeattyError):
    """Base for failures of a parameter-recovery pipeline."""


class TrendMismatch(RecoveryError):
    pass


class ComplexRoots(RecoveryError):
    pass


class RootOutOfRange(RecoveryError):
    pass


class DegenerateInput(RecoveryError):
    pass


class RationalCase(RecoveryError):
    """Input looks like a rational parameter vector, which the linear-sum recovery excludes."""


class NoFullJumps(RecoveryError):
    pass


class EmptyIntersection(RecoveryError):
    pass


class InsufficientDetections(RecoveryError):
    pass


class WrongClusterCount(RecoveryError):
    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected


class PairingFailure(RecoveryError):
    pass


class NegativeIntermediate(RecoveryError):
    pass


class OutOfRange(RecoveryError):
    pass


class DiscriminantNegative(RecoveryError):
    pass


class DenominatorNearZero(RecoveryError):
    pass


class WrongLevelCount(RecoveryError):
    def __init__(self, message, found=None, expected=None):
        super().__init__(message)
        self.found = found
        self.expected = expected
