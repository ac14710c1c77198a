"""Exception types raised across the package."""


class NotPrime(ValueError):
    pass


class TooLarge(ValueError):
    pass


class ZeroInverse(ZeroDivisionError):
    pass


class DimensionMismatch(ValueError):
    pass


class BadSparsity(ValueError):
    pass


class BadRates(ValueError):
    pass


class ZeroScale(ValueError):
    pass


class ShrinkNotAllowed(ValueError):
    pass


class OutOfDomain(ValueError):
    pass


class PreconditionFailed(ValueError):
    pass


class EmptyBand(ValueError):
    pass


class TooLargeToEnumerate(ValueError):
    pass


class SealedTarget(RuntimeError):
    """Raised when something asks a replayed (challenge) stream for its target."""


class ContractViolation(RuntimeError):
    """The approximator or the table broke the guarantees the reduction relies on."""


class RejectionStall(ContractViolation):
    pass


class NoGapFound(ContractViolation):
    pass


class IntervalOverlap(ContractViolation):
    pass


class CalibrationAmbiguous(RuntimeError):
    pass


class NoIrrelevantIndex(RuntimeError):
    pass


class AmbiguousCoefficient(RuntimeError):
    pass


class EmptyCandidateSet(ValueError):
    pass


class LearningFailed(RuntimeError):
    """A single learner run produced no hypothesis (undecided or inconsistent verdicts)."""


class AllRunsFailed(LearningFailed):
    pass


class NoMajority(LearningFailed):
    pass


class BudgetExceeded(RuntimeError):
    pass
