"""
Exception hierarchy for the Kneser toolkit.

Every failure a library function can signal is a subclass of
KneserToolError, so the CLI can catch one type and report the message
verbatim.
"""


class KneserToolError(Exception):
    """Base class for all toolkit errors."""


class InvalidFactorError(KneserToolError):
    """A cyclic factor is smaller than 2 (or no factor was given)."""


class SizeCapExceededError(KneserToolError):
    """A group order exceeds the configured size cap."""


class ElementArityError(KneserToolError):
    """An element has the wrong number of coordinates for its group."""


class RankIndexError(KneserToolError, IndexError):
    """A rank lies outside [0, order)."""


class GroupMismatchError(KneserToolError):
    """Two operands live in different groups."""


class EnumerationCapExceededError(KneserToolError):
    """A subgroup enumeration or exhaustive sweep exceeds its cap."""


class DescentImpossibleError(KneserToolError):
    """The index of L ∩ G_lo in G_lo does not divide k (levels are not nested)."""


class EmptySequenceError(KneserToolError):
    """A stabilizer sequence is empty."""


class EmptySetError(KneserToolError):
    """An operand that must be nonempty is empty."""


class DivisibilityError(KneserToolError):
    """A divisor chain d_1 | d_2 | ... is broken."""


class PrimalityError(KneserToolError):
    """A family parameter that must be prime is not."""


class DepthError(KneserToolError):
    """A truncation depth is smaller than required."""


class LevelRangeError(KneserToolError, IndexError):
    """A level index lies outside [1, N] (or a rank outside its level)."""


class ExponentTwoObstructionError(KneserToolError):
    """Some quotient G_{n+1}/G_n has exponent 2, so no shifted-coset witness exists."""


class WindowError(KneserToolError):
    """A tail window is empty or longer than the profile."""


class HypothesisShapeError(KneserToolError):
    """The upper-density statement requires A = B or A = -B bit-exactly."""


class SpecParseError(KneserToolError):
    """A JSON spec is malformed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f"parse-error at line {line}, column {column}: {message}"
        else:
            message = f"parse-error: {message}"
        super().__init__(message)
