"""Exception types shared across the package."""
from __future__ import annotations


class ConfigError(ValueError):
    """A device description violates one or more structural invariants.

    ``violations`` holds one human-readable message per failed check.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SolverError(RuntimeError):
    """A numerical routine hit a degeneracy it cannot resolve.

    ``context`` carries structured details (offending equations, parameter
    values) so callers can report the failure without string parsing.
    """

    def __init__(self, message, **context):
        self.context = dict(context)
        super().__init__(message)
