"""Exception hierarchy shared by the workbench modules."""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all errors raised on bad input."""


class ParseError(WorkbenchError):
    def __init__(self, message: str, line: int = 0, column: int = 0,
                 expected: frozenset[str] | None = None, path: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected or frozenset()
        self.path = path
        where = f"{path}:" if path else ""
        text = f"{where}{line}:{column}: {message}"
        if self.expected:
            text += " (expected one of: " + ", ".join(sorted(self.expected)) + ")"
        super().__init__(text)
        self.message = message


class DefinitionError(WorkbenchError):
    pass


class PlanError(WorkbenchError):
    pass


class ModelError(WorkbenchError):
    pass


class BudgetError(WorkbenchError):
    """Model enumeration would exceed the configured budget."""


class DerivationError(WorkbenchError):
    pass
