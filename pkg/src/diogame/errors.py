"""Exception hierarchy shared by all modules."""


class DiogameError(Exception):
    """Base class."""


class NotAWeight(DiogameError, ValueError):
    pass


class BadParameters(DiogameError, ValueError):
    pass


class BudgetExceeded(DiogameError):
    """A finite search ran out of its node or range budget.

    Not a statement about the mathematics: the caller should refine the
    search region or raise the budget.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class HypothesisViolated(DiogameError, ValueError):
    pass


class InternalSearchFailure(DiogameError, AssertionError):
    """An existence result failed to produce a witness (a bug, never expected)."""


class OutOfRange(DiogameError, ValueError):
    pass


class EmptyCritical(DiogameError, ValueError):
    pass


class PrecisionExhausted(DiogameError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class NoWinningReduction(DiogameError, ValueError):
    pass


# -- referee verdicts -------------------------------------------------------


class IllegalMove(DiogameError):
    """A referee rejected a move; ``clause`` names the violated rule."""

    clause = "illegal"

    def __init__(self, message: str, mover: str | None = None):
        super().__init__(message)
        self.mover = mover


class IllegalRadius(IllegalMove):
    clause = "IllegalRadius"


class NotContained(IllegalMove):
    clause = "NotContained"


class SlabTooWide(IllegalMove):
    clause = "SlabTooWide"


class BallMeetsSlab(IllegalMove):
    clause = "BallMeetsSlab"


class FamilyBudgetExceeded(IllegalMove):
    clause = "FamilyBudgetExceeded"


class WrongTurn(IllegalMove):
    clause = "WrongTurn"


class OracleIllegal(IllegalMove):
    clause = "OracleIllegal"


class NoLegalMove(DiogameError):
    pass
