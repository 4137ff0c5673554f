"""Exception hierarchy shared by every ddcsim module."""


class DdcError(Exception):
    """Base class for simulator errors."""


class ConfigError(DdcError, ValueError):
    pass


class AllocationError(DdcError):
    """Raised when a reservation would exceed available capacity."""


class IntegrityError(DdcError):
    """Raised on over-release, double release or a broken invariant.

    ``dump`` optionally carries a snapshot of simulator state at the failure.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump


class TraceParseError(DdcError, ValueError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ValidationError(DdcError, ValueError):
    pass


class ReportError(DdcError, ValueError):
    pass


class SchemaError(DdcError, ValueError):
    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")
