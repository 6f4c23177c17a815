"""Exception types shared across the package."""


class AutoseriesError(Exception):
    """Base class for all domain errors raised by this package."""


class BudgetError(AutoseriesError):
    """A size or extension-degree budget was exceeded."""


class WindowError(AutoseriesError):
    """A truncation window is too small to determine the requested value."""


class ExpansionError(AutoseriesError):
    """A string is not a valid radix expansion, or a value is not representable."""


class MachineError(AutoseriesError):
    """An automaton is malformed for the requested operation."""


class SolveError(AutoseriesError):
    """A solver precondition failed (non-squarefree input, zero coefficient, ...)."""
