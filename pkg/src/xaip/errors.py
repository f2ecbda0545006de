"""Exception hierarchy.

Usage errors (bad input text, unknown names, ill-typed questions) are raised
as exceptions; a plan that simulates to a broken state is not an error but a
ValidationReport with valid=False.
"""

from __future__ import annotations


class XaipError(Exception):
    """Base class for all errors raised by this package."""


class PddlSyntaxError(XaipError):
    """Malformed PDDL or plan text, with a source position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedConstructError(PddlSyntaxError):
    """Input uses PDDL outside the supported subset; rejected loudly."""

    def __init__(self, construct: str, line: int | None = None, column: int | None = None):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", line, column)


class PddlSemanticError(XaipError):
    """Well-formed text that breaks a model-level rule (types, arities, names)."""


class PlanFormatError(XaipError):
    """Malformed plan line or a plan referencing unknown actions/objects."""


class CompilationError(XaipError):
    """A question that cannot be compiled against the given model and plan."""


class InapplicableSuggestionError(CompilationError):
    """User-suggested action is not applicable in the projected state."""


class PlannerConfigError(XaipError):
    """Bad planner configuration (missing command, bad placeholders)."""


class SessionError(XaipError):
    """Session-level usage errors (unknown node, invalid root plan)."""


class UnknownIdError(SessionError):
    """Lookup of a session or node id that does not exist."""


class AskInFlightError(SessionError):
    """A second ask was issued while one is still running on this session."""


class InternalValidationError(XaipError):
    """A compiled HPlan failed validation against the original model.

    This signals a compilation bug and is never shown as an explanation.
    """
