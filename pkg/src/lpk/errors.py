"""Exception hierarchy shared by every engine."""


class LogicError(Exception):
    """Base class for all engine errors."""


class CyclicTermError(LogicError):
    """A cyclic binding was reached while building a concrete term."""


class DepthLimitExceeded(LogicError):
    """Search was cut off by the configured depth limit.

    This is a resource error. It is never reported as exhaustive failure.
    """


class ClauseLimitExceeded(LogicError):
    """The resolution prover ran out of its clause budget."""


class MalformedError(LogicError, ValueError):
    """A literal, procedure or formula violates its structural invariants."""


class NonGroundError(LogicError, ValueError):
    """An operation that requires ground terms received a variable."""


class ExistentialUnsupported(LogicError, ValueError):
    """The clausifier does not Skolemize; existentials are rejected."""


class UnknownCommand(LogicError):
    pass


class ParseError(LogicError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.message = message
        self.line = line
        self.column = column


class NegationUnsupported(ParseError):
    """Prolog mode has no true negation."""
