class LittlewoodOffordError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


# Input errors
# ------------


class ConfigInvalid(LittlewoodOffordError, ValueError):
    exit_code = 2


class InvalidParameter(LittlewoodOffordError, ValueError):
    exit_code = 2


class InvalidGap(LittlewoodOffordError, ValueError):
    exit_code = 2


class InvalidDistribution(LittlewoodOffordError, ValueError):
    exit_code = 2


class NotSymmetric(LittlewoodOffordError, ValueError):
    exit_code = 2


class NotProper(LittlewoodOffordError, ValueError):
    exit_code = 2


class PointOutsideBox(LittlewoodOffordError, ValueError):
    exit_code = 2


class SizeMismatch(LittlewoodOffordError, ValueError):
    exit_code = 2


class EmptyCenterGrid(LittlewoodOffordError, ValueError):
    exit_code = 2


# Budget errors
# -------------


class BudgetExceeded(LittlewoodOffordError, RuntimeError):
    exit_code = 3


class VolumeExceedsCap(BudgetExceeded):
    exit_code = 3


class SearchSpaceExceeded(BudgetExceeded):
    exit_code = 3


# Infeasibility
# -------------


class InfeasibleK(LittlewoodOffordError, RuntimeError):
    exit_code = 4


class NoGoodVectors(LittlewoodOffordError, RuntimeError):
    exit_code = 4


class NoSpanningTuple(LittlewoodOffordError, RuntimeError):
    exit_code = 4


# Consensus and coverage
# ----------------------


class CoverageFloorMissed(LittlewoodOffordError, RuntimeError):
    exit_code = 5


class InsufficientSubsetConsensus(LittlewoodOffordError, RuntimeError):
    exit_code = 5
