"""Exception hierarchy shared by the library and the command-line front end."""


class NHSpectraError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "ERROR"
    #: exit status used by the CLI (1 = computational, 2 = input)
    exit_status = 1

    def __init__(self, message="", **details):
        super().__init__(message)
        self.message = message
        self.details = details


class InputError(NHSpectraError):
    code = "INPUT_ERROR"
    exit_status = 2


class InputNotFound(InputError):
    code = "INPUT_NOT_FOUND"


class MalformedInput(InputError):
    code = "MALFORMED_INPUT"


class InconsistentDimensions(InputError):
    code = "INCONSISTENT_DIMENSIONS"


class UnknownVariant(InputError):
    code = "UNKNOWN_VARIANT"


class NonConstantDimension(InputError):
    code = "NON_CONSTANT_DIMENSION"


class DimensionTooLarge(InputError):
    code = "DIMENSION_TOO_LARGE"


class DegenerateMap(NHSpectraError):
    code = "DEGENERATE_MAP"


class PivotBreakdown(NHSpectraError):
    """A continued-fraction denominator (or 2x2 block) became singular.

    ``index`` is the 1-based position k at which the breakdown happened; it
    means the spectral parameter is (numerically) an eigenvalue of the
    trailing sub-chain k..N.
    """

    code = "PIVOT_BREAKDOWN"

    def __init__(self, index, message=None):
        super().__init__(message or f"pivot breakdown at k={index}", index=index)
        self.index = index


class GridTooCoarse(NHSpectraError):
    code = "GRID_TOO_COARSE"

    def __init__(self, message, found=()):
        super().__init__(message, found=list(found))
        self.found = list(found)
