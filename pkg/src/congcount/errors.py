"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: domain 1, config 2, resource 3.
"""


class CongCountError(Exception):
    exit_code = 1


class DomainError(CongCountError, ValueError):
    """Input outside an operation's domain."""


class ConstructionError(DomainError):
    """A spec could not be built (no trim parameter, bad disks, ...)."""


class NumericError(CongCountError, ArithmeticError):
    """Iteration failed to converge or a bracket could not be found."""


class ResourceError(CongCountError):
    exit_code = 3

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(CongCountError):
    exit_code = 2
