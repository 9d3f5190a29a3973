"""Exception hierarchy and process exit codes."""


class HonlsError(Exception):
    """Base class for all package errors."""


class ValidationError(HonlsError):
    """A configuration or precondition check failed before any compute."""

    exit_code = 2


class DomainError(HonlsError):
    """A numerical quantity left its guaranteed domain (e.g. the
    nonlinearity was evaluated outside its convergence radius)."""

    exit_code = 3


class ConvergenceError(HonlsError):
    """An iterative scheme failed to converge."""

    exit_code = 4


class ThresholdError(ValidationError):
    """Initial data exceeds the well-posedness smallness threshold."""


class ConfigError(ValidationError):
    """Malformed or inconsistent experiment configuration."""


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, HonlsError):
        return getattr(exc, "exit_code", 1)
    return 1
