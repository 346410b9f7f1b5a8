"""Exception types.  Each carries a short machine-readable code for reports."""


class SuperholonomyError(Exception):
    code = "error"


class ContextMismatch(SuperholonomyError):
    code = "context_mismatch"


class NotInvertible(SuperholonomyError):
    code = "not_invertible"


class PreconditionViolated(SuperholonomyError):
    code = "precondition_violated"


class InhomogeneousInput(SuperholonomyError):
    code = "inhomogeneous"


class DegenerateRestriction(SuperholonomyError):
    code = "degenerate_restriction"


class NoSolution(SuperholonomyError):
    code = "no_solution"


class NonInvertibleMetric(SuperholonomyError):
    code = "non_invertible_metric"


class ParityMismatch(SuperholonomyError):
    code = "parity_mismatch"


class TTooSmall(SuperholonomyError):
    code = "t_too_small"


class HybridModeUnsupported(SuperholonomyError):
    code = "hybrid_mode_unsupported"


class SpecInsufficient(SuperholonomyError):
    code = "spec_insufficient"


class NotFree(SuperholonomyError):
    code = "not_free"


class DegenerateCandidate(SuperholonomyError):
    code = "degenerate_candidate"


class NotSubmersion(SuperholonomyError):
    code = "not_submersion"


class Incompatible(SuperholonomyError):
    code = "incompatible"


class NoDescent(SuperholonomyError):
    code = "no_descent"


class ModelError(SuperholonomyError):
    """Problems in a model file; carries line and column when known."""

    code = "model_error"

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)


class ParseSyntaxError(ModelError):
    code = "syntax_error"


class UnknownSymbol(ModelError):
    code = "unknown_symbol"


class ParityError(ModelError):
    code = "parity_error"
