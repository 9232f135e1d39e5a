"""Exception types shared across the library."""


class DdlpbError(Exception):
    """Base class for all library errors."""


class ConfigurationError(DdlpbError):
    """Invalid or unsupported configuration value."""


class DomainError(DdlpbError):
    """Input outside the mathematical domain of an operation."""


class SingularInputError(DdlpbError):
    """Geometry places an evaluation point on top of a singularity."""


class ParseError(DdlpbError):
    """Malformed structure file."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" [{loc}]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class ConvergenceError(DdlpbError):
    """Iterative solve failed to reach its tolerance within the caps."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
