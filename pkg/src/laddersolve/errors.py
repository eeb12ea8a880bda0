"""Exception taxonomy shared by every module.

Four classes of failure are distinguished because the CLI maps them to
distinct exit codes: bad inputs (2), misuse of the in-memory API (2),
violated structural hypotheses of a problem (2), and numerical breakdown
of an algorithm (3).
"""


class LadderSolveError(Exception):
    """Base class for all package errors."""


class ConfigurationError(LadderSolveError):
    """Invalid user input: bad geometry, parameters, ladder or config file."""


class UsageError(LadderSolveError):
    """In-memory API misuse, e.g. a grid function paired with the wrong grid."""


class HypothesisViolationError(LadderSolveError):
    """A structural hypothesis of the problem fails, voiding a guarantee."""


class NumericError(LadderSolveError):
    """An iterative algorithm failed to converge or broke down.

    Carries the last iterate when a solver can provide one.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
