"""Exception hierarchy.

Three classes of failure map onto the CLI exit codes: malformed input
(2), unmet mathematical preconditions (3) and exhausted resource budgets
(4).
"""


class FthreshError(Exception):
    """Base class for all library errors."""

    exit_code = 1
    code = "ERROR"


class InputError(FthreshError, ValueError):
    """Malformed input: syntax errors, schema violations, bad flags."""

    exit_code = 2
    code = "INPUT"


class ParseError(InputError):
    code = "PARSE"

    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        if position >= 0:
            message = f"{message} at position {position}"
        super().__init__(message)


class PreconditionError(FthreshError, ValueError):
    """A mathematical precondition of an operation does not hold."""

    exit_code = 3
    code = "PRECONDITION"


class PairNotFPure(PreconditionError):
    code = "PAIR_NOT_F_PURE"


class UnstableError(PreconditionError):
    """A chain did not stabilise, so no boolean answer can be given."""

    code = "UNSTABLE"


class BudgetExceeded(FthreshError, RuntimeError):
    """A configured resource cap (pairs, degree, exponent, steps) was hit."""

    exit_code = 4
    code = "BUDGET_EXCEEDED"
