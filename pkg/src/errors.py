# src/errors.py – error hierarchy; exit codes are read by dgldpc.py


class DGLDPCError(Exception):
    exit_code = 1


class InvalidParameterError(DGLDPCError, ValueError):
    exit_code = 2


class ValidationError(InvalidParameterError):
    """Bad ensemble or config contents. ``location`` is a JSON path or line/column."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class DegenerateEnsembleError(ValidationError):
    pass


class DomainError(DGLDPCError, ValueError):
    exit_code = 2


class StructuralZeroError(DomainError):
    pass


class SolverError(DGLDPCError, RuntimeError):
    """Non-convergence. Carries the best residual vector seen and free-form diagnostics."""

    exit_code = 3

    def __init__(self, message: str, residuals=None, diagnostics: dict | None = None):
        self.residuals = residuals
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class NoCrossingError(SolverError):
    pass


class ResourceLimitError(DGLDPCError, RuntimeError):
    exit_code = 4
