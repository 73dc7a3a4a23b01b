"""
Tourney Lab - 异常层级
库代码只抛出异常；退出码的映射只在 cli.py 中完成。
"""


class TourneyError(Exception):
    """Base class for every error raised by the package."""


# --- Distributions ---
class InvalidDistribution(TourneyError):
    pass


class EmptyDistribution(InvalidDistribution):
    pass


class ZeroOrNegativeProbability(InvalidDistribution):
    pass


class ProbabilitiesDoNotSumToOne(InvalidDistribution):
    pass


class DimensionMismatch(InvalidDistribution):
    pass


class InvalidRational(TourneyError):
    """A value could not be read as an exact rational."""

    def __init__(self, message: str, field: str = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class InvalidProbability(TourneyError):
    pass


class ZeroProbabilityEvent(TourneyError):
    pass


# --- Budgets ---
class BudgetExceeded(TourneyError):
    """An enumeration would exceed a configured cap; never a silent truncation."""

    budget_name = "budget"

    def __init__(self, limit: int, needed: int = None, detail: str = ""):
        self.limit = limit
        self.needed = needed
        msg = f"{self.budget_name} exceeded (limit {limit}"
        if needed is not None:
            msg += f", needed {needed}"
        msg += ")"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class AtomBudgetExceeded(BudgetExceeded):
    budget_name = "atom budget"


class SearchBudgetExceeded(BudgetExceeded):
    def __init__(self, limit: int, needed: int = None, detail: str = "", budget_name: str = "search budget"):
        self.budget_name = budget_name
        super().__init__(limit, needed, detail)


# --- Function tables ---
class TableError(TourneyError):
    pass


class TableIncomplete(TableError):
    pass


class NotMonotone(TableError):
    pass


# --- Coordinate subsets ---
class SubsetError(TourneyError):
    pass


class EmptySubset(SubsetError):
    pass


class IndexOutOfRange(SubsetError):
    pass


class OverlappingSubsets(SubsetError):
    pass


# --- Models / orchestration ---
class PreconditionNAFailed(TourneyError):
    """A random-sum round law is not negatively associated."""

    def __init__(self, round_index: int, result=None):
        self.round_index = round_index
        self.result = result
        super().__init__(f"round {round_index} fails check_na")


class ConfigError(TourneyError):
    pass


class UnknownScenario(TourneyError):
    pass
