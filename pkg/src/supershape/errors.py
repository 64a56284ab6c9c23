"""Exception types shared across the package."""


class SupershapeError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SupershapeError, ValueError):
    pass


class DimensionError(SupershapeError, ValueError):
    pass


class DegenerateOutlineError(SupershapeError, ValueError):
    pass


class InsufficientTrainingError(SupershapeError, ValueError):
    pass


class DegenerateTrainingError(SupershapeError, ValueError):
    pass


class DegenerateWeightsError(SupershapeError, ValueError):
    pass


class FormatError(SupershapeError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)
