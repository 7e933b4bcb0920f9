"""
Exception hierarchy shared by the library, the CLI and the HTTP service.

Every exception carries the process exit code the CLI maps it to.
"""


class ExperimentError(Exception):
    """Base class for all errors raised by the mirror-reparam services"""

    exit_code = 1

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.message = message
        self.diagnostics = dict(diagnostics or {})

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "message": self.message,
            "details": self.diagnostics,
        }


class ConfigurationError(ExperimentError):
    """Invalid configuration, unsupported combination or degenerate domain"""

    exit_code = 1


class RejectedInputError(ExperimentError, ValueError):
    """An operation precondition was violated by the caller"""

    exit_code = 1


class NumericalFailure(ExperimentError):
    """Projection, link inversion or quadrature did not converge"""

    exit_code = 2


class RunAborted(NumericalFailure):
    """A learner run failed mid-way; keeps the partial trace"""

    def __init__(self, message, trace=None, step=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.trace = trace
        self.step = step
        self.diagnostics.setdefault("step", step)


class AcceptanceFailure(ExperimentError):
    """A verification subcommand ran but its acceptance check failed"""

    exit_code = 3
