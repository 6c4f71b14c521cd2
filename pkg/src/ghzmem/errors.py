"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`GhzMemError`.
The ``exit_code`` attribute is what the command-line front end returns.
"""


class GhzMemError(Exception):
    exit_code = 3


class ParseError(GhzMemError, ValueError):
    """Malformed PBM, shape-spec or state-dump input."""

    exit_code = 2

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SizeError(GhzMemError, ValueError):
    pass


class DimensionError(GhzMemError, ValueError):
    pass


class ProbabilityError(GhzMemError, ValueError):
    pass


class QubitIndexError(GhzMemError, IndexError):
    pass


class OperatorError(GhzMemError, ValueError):
    pass


class CoordinateError(GhzMemError, ValueError):
    pass


class OverlapError(GhzMemError, ValueError):
    pass


class CapacityError(GhzMemError, ValueError):
    pass


class OracleError(GhzMemError, ValueError):
    pass


class ConsistencyError(GhzMemError):
    """Overlapping or surplus violating subsets found during retrieval."""

    exit_code = 4


class InternalError(GhzMemError, RuntimeError):
    pass


class ModeError(GhzMemError, ValueError):
    """Operation requested on a memory stored in the wrong mode."""
