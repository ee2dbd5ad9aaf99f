"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Field/graph mismatch: wrong length or fields from different graphs."""


class InvalidDomainError(ValueError):
    """A vertex set is empty, not stored in the graph, or otherwise unusable."""


class InvalidParameterError(ValueError):
    """A numeric parameter violates its admissible range."""


class InvalidInputError(ValueError):
    """An operation precondition on its input field is violated."""


class HypothesisViolationError(ValueError):
    """The potential/well fails one of the standing structural hypotheses."""


class ConstraintViolationError(ValueError):
    """A field is nonzero where the problem forces it to vanish."""


class NumericalFailureError(RuntimeError):
    """A numerical procedure failed to converge or to find a bracket."""


class StagnationError(NumericalFailureError):
    """Descent made no progress for too many consecutive iterations."""


class RefinementFailureError(NumericalFailureError):
    """Newton refinement diverged; the unrefined iterate is reported."""


class NoCandidateError(NumericalFailureError):
    """Every seed failed; the solve produced no candidate minimizer."""


class ReportIncompleteError(RuntimeError):
    """Not enough certified rows to assemble a convergence report."""


class ConfigError(ValueError):
    """Config file is unreadable or violates the schema (line-anchored)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SolutionFormatError(ValueError):
    """Solution file is malformed (byte offset included when known)."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
