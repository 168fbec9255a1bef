"""Exception hierarchy for walklim."""


class WalklimError(Exception):
    """Base class for all walklim errors."""


class NotAProbabilityVector(WalklimError):
    """Step probabilities do not form a valid probability vector."""


class NotMeanZero(WalklimError):
    """Step law violates the mean-zero constraint sum(l * p_l) = q."""


class OutOfRange(WalklimError):
    """Parameter outside its admissible interval."""


class UnsupportedL(WalklimError):
    """Operation only defined for the L = 2 machinery."""


class ExcursionTooLong(WalklimError):
    """An excursion exceeded the step budget before returning to 0.

    Carries the partial length so callers can account for the discard.
    """

    def __init__(self, partial_length: int):
        self.partial_length = partial_length
        super().__init__(f"excursion exceeded step budget at {partial_length} steps")


class PopulationCapExceeded(WalklimError):
    """A branching generation exceeded the particle cap."""


class TruncationBudgetExceeded(WalklimError):
    """enumerate_pmf could not capture the requested mass within its support budget."""


class EmptySample(WalklimError):
    """A statistic was requested from an empty sample."""
