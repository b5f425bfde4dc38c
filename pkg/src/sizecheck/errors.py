"""Errors and diagnostics shared across the checker."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int = 0
    end_col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class SizecheckError(Exception):
    """Base class for all user-facing checker errors."""

    code = "E-INTERNAL"

    def __init__(self, message: str, span: Span | None = None, fixpoint: str | None = None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.fixpoint = fixpoint

    def render(self, filename: str | None = None) -> str:
        loc = ""
        if filename is not None:
            loc = filename
        if self.span is not None:
            loc = f"{loc}:{self.span}" if loc else str(self.span)
        head = f"{loc}: " if loc else ""
        msg = self.message
        if self.fixpoint is not None and self.fixpoint not in msg:
            msg = f"fixpoint '{self.fixpoint}': {msg}"
        return f"{head}error[{self.code}]: {msg}"


class ParseFailure(SizecheckError):
    code = "E-PARSE"


class UnknownName(SizecheckError):
    code = "E-UNKNOWN-NAME"


class DuplicateName(SizecheckError):
    code = "E-DUPLICATE"


class NotConvertible(SizecheckError):
    code = "E-NOTCONVERTIBLE"

    def __init__(self, message, lhs=None, rhs=None, **kw):
        super().__init__(message, **kw)
        self.lhs = lhs
        self.rhs = rhs


class NotSubtype(SizecheckError):
    code = "E-NOTSUBTYPE"

    def __init__(self, message, lhs=None, rhs=None, **kw):
        super().__init__(message, **kw)
        self.lhs = lhs
        self.rhs = rhs


class NotASort(SizecheckError):
    code = "E-NOT-A-SORT"


class ExpectedFunction(SizecheckError):
    code = "E-EXPECTED-FUNCTION"


class ExpectedInductive(SizecheckError):
    code = "E-EXPECTED-INDUCTIVE"


class BranchArityMismatch(SizecheckError):
    code = "E-BRANCH-ARITY"


class ForbiddenElimination(SizecheckError):
    code = "E-ELIM"


class NotEnoughArguments(SizecheckError):
    code = "E-DECOMPOSE"


class NotInductiveRecursiveArg(SizecheckError):
    code = "E-REC-ARG"


class NotCoinductiveReturn(SizecheckError):
    code = "E-COREC-RETURN"


class NoValidRecursiveArgument(SizecheckError):
    code = "E-NO-REC-ARG"


class StructuralMismatch(SizecheckError):
    code = "E-STRUCT-MISMATCH"


class Unsatisfiable(SizecheckError):
    code = "E-UNSAT"


class KernelBug(SizecheckError):
    """Invariant violation inside the checker itself, never a user error."""

    code = "E-KERNEL-BUG"


class RecCheckFailure(Exception):
    """Control flow only: carries position variables that must be demoted."""

    def __init__(self, vars: frozenset[int]):
        super().__init__(f"demote {sorted(vars)}")
        self.vars = frozenset(vars)
