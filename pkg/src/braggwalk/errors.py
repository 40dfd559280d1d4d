"""Exception types shared across the package.

The CLI maps these onto process exit codes (see cli.EXIT_*); library code
raises plain ValueError for ordinary contract violations.
"""


class BraggWalkError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BraggWalkError):
    """Invalid run configuration or malformed input file.

    ``location`` is a human-readable anchor ("path:line") when the error
    can be tied to a specific line of an input file.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ResourceError(BraggWalkError):
    """A run would exceed the configured memory/size budget.

    Carries the required and allowed amounts so callers can report what
    the run would have needed.
    """

    def __init__(self, message: str, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(f"{message} (required {required}, budget {budget})")


class NumericsError(BraggWalkError):
    """A non-finite amplitude appeared during propagation (implementation bug)."""


class SweepError(BraggWalkError):
    """One or more member runs of a gap sweep failed.

    ``failures`` maps gap values to error messages; ``partial`` holds the
    (gap, confined-intensity) results that did complete, in input order.
    """

    def __init__(self, failures: list[tuple[float, str]], partial: list[tuple[float, float]]):
        self.failures = failures
        self.partial = partial
        detail = "; ".join(f"gap={g:g}: {msg}" for g, msg in failures)
        super().__init__(f"{len(failures)} sweep run(s) failed: {detail}")
