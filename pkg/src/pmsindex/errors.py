"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
(anything rooted at :class:`DataError`) exit 2, everything else exits 3.
"""


class PmsIndexError(Exception):
    """Base class for all package-specific errors."""


class DataError(PmsIndexError):
    """Bad input data: unusable fixtures, schema violations, and kin."""


class ParseError(DataError):
    """Toy-language syntax error, with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, col {col})")
        self.line = line
        self.col = col


class ToyRuntimeError(PmsIndexError):
    """Runtime fault inside an interpreted program (undefined variable,
    type mismatch, division by zero). Recorded as a failed test outcome."""


class NonterminatingRunError(DataError):
    """The interpreter exceeded its step budget."""


class CompositionError(DataError):
    """Mutants could not be composed (overlapping targets, bad edit)."""


class OracleAmbiguityError(DataError):
    """A composed-version failure maps to zero or several single-fault
    versions; the faulty version is rejected from the benchmark."""


class EmptyBreakpointError(DataError):
    """Top-x% selection produced zero breakpoints."""


class MisclassifiedTestError(DataError):
    """A test expected to fail passed (or vice versa)."""


class DegenerateImageError(DataError):
    """A memory trace with no entries cannot become an image."""


class SchemaError(DataError):
    """A persisted artifact does not match its documented schema."""
