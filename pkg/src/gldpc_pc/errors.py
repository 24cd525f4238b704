"""Exception types shared across the package."""


class CodingError(Exception):
    """Base class for all errors raised by this package."""


class BadLength(CodingError):
    """Code length is invalid (not a power of two, or out of range)."""


class BadParams(CodingError):
    """Construction parameters are inconsistent."""


class LengthMismatch(CodingError):
    """An input sequence does not have the expected length."""


class RankDeficient(CodingError):
    """A matrix has fewer independent rows than required.

    The ``rank`` attribute carries the GF(2) row rank that was found.
    """

    def __init__(self, rank):
        super().__init__(f"matrix is rank deficient (row rank {rank})")
        self.rank = rank


class DegenerateCode(CodingError):
    """The code has dimension zero."""


class DegreeMismatch(CodingError):
    """An adjacency-matrix row weight does not match its component length."""

    def __init__(self, row, expected, got):
        super().__init__(
            f"adjacency row {row} has weight {got}, component length is {expected}"
        )
        self.row = row


class TooLarge(CodingError):
    """Problem size exceeds a supported bound."""


class ParseError(CodingError):
    """A text input could not be parsed.

    The ``line`` attribute carries the 1-based line number of the failure.
    """

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FileError(CodingError):
    """A required auxiliary file is missing or malformed."""
