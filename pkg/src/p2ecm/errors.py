"""Exception types raised across the package."""


class P2EcmError(Exception):
    """Base class for all package errors."""


class InvalidLevelError(P2EcmError, ValueError):
    pass


class GridIndexError(P2EcmError, IndexError):
    pass


class ShapeError(P2EcmError, ValueError):
    pass


class SpecError(P2EcmError, ValueError):
    pass


class IndexOverflowError(P2EcmError, OverflowError):
    pass


class MachineFileError(P2EcmError, ValueError):
    """Malformed machine or LC-fixture file; carries the offending line number."""

    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)
