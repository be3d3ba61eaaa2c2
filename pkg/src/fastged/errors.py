"""Exception hierarchy shared by the whole package."""


class GedError(Exception):
    """Base class for all package errors."""


class InvalidGraphError(GedError, ValueError):
    pass


class InvalidOperationError(GedError, ValueError):
    pass


class InvalidPathError(GedError, ValueError):
    pass


class InvalidMappingError(GedError, ValueError):
    pass


class InvalidStateError(GedError, RuntimeError):
    pass


class ParseError(GedError, ValueError):
    def __init__(self, message, source=None):
        if source is not None:
            message = f"{source}: {message}"
        super().__init__(message)
        self.source = source


class DatasetError(GedError, ValueError):
    pass


class TooLargeError(GedError, ValueError):
    pass


class CapacityError(GedError, MemoryError):
    """Raised when a level's candidate buffer cannot be allocated."""

    def __init__(self, level, candidates, needed_bytes=None):
        msg = f"level {level}: cannot hold {candidates} candidates"
        if needed_bytes is not None:
            msg += f" (~{needed_bytes / 2**20:.0f} MiB)"
        super().__init__(msg)
        self.level = level
        self.candidates = candidates


class BudgetExceededError(GedError, RuntimeError):
    """The exact search ran out of node budget.

    ``incumbent`` holds the best complete path found so far (not proven optimal).
    """

    def __init__(self, expanded, incumbent):
        super().__init__(
            f"node budget exhausted after {expanded} expansions "
            f"(best found: {incumbent.distance:g})"
        )
        self.expanded = expanded
        self.incumbent = incumbent
