class SymstochError(Exception):
    """Base class for every error raised by the symstoch package."""


class CapacityError(SymstochError):
    """A coefficient table would exceed the configured cell budget."""

    def __init__(self, cells: int, budget: int) -> None:
        super().__init__(f"table needs {cells} cells, cell budget is {budget}")
        self.cells = cells
        self.budget = budget


class ParityError(SymstochError, ValueError):
    """An odd entry total where only even totals are meaningful."""


class DomainError(SymstochError, ValueError):
    """An argument lies outside the domain of a formula."""


class GuardrailError(SymstochError, ValueError):
    """The brute-force oracle was asked for an instance outside its range."""


class IntegralityError(SymstochError, ValueError):
    """A dilation does not turn the diagonal into integer row sums."""


class InsufficientDataError(SymstochError):
    """Not enough nonzero data to form an estimate."""


class CacheLockedError(SymstochError):
    """Another process holds the count cache lock."""
