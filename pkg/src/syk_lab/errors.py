"""Error types shared across the package.

Plain ValueError is used for domain/precondition violations; the classes here
carry a process exit code for the command-line front end.
"""


class SykLabError(Exception):
    exit_code = 1


class ConfigError(SykLabError):
    """Bad or inconsistent run configuration."""
    exit_code = 2


class ResourceError(SykLabError):
    """A size/memory cap would be exceeded."""
    exit_code = 3


class ConvergenceError(SykLabError):
    """An iterative solver failed to reach its tolerance."""
    exit_code = 4

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class PartialFailure(SykLabError):
    """Too many ensemble realizations failed."""
    exit_code = 5
