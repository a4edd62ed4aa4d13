"""Exception hierarchy shared by every pfalg module."""


class PfalgError(Exception):
    """Base class; the CLI maps these to exit code 2 unless noted."""


class CarrierMismatch(PfalgError):
    pass


class SizeCapExceeded(PfalgError):
    pass


class ParseError(PfalgError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownSymbol(ParseError):
    pass


class ArityError(ParseError):
    pass


class MissingSymbol(PfalgError):
    pass


class UnassignedVariable(PfalgError):
    pass


class NotACongruence(PfalgError):
    pass


class NotApplicable(PfalgError):
    """Raised when an operation's precondition on its arguments fails."""


class UnsupportedSignature(PfalgError):
    pass


class UnknownName(PfalgError):
    pass


class AxiomFailure(PfalgError):
    """An algebra was refused because it violates a required law."""

    def __init__(self, violation):
        super().__init__(f"axiom failure: {violation}")
        self.violation = violation


class InternalContradiction(PfalgError):
    """A computed fact contradicts a result the toolkit relies on.

    Carries the offending witness so it can be reported rather than hidden.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
