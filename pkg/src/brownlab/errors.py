"""Exception hierarchy shared by all brownlab modules."""


class BrownlabError(Exception):
    """Base class for every error raised by brownlab."""


class NotHermitian(BrownlabError, ValueError):
    pass


class NotSelfAdjoint(BrownlabError, ValueError):
    def __init__(self, atom, residual):
        self.atom = atom
        self.residual = residual
        super().__init__(f"block {atom} is not self-adjoint (residual {residual:.3e})")


class NotNormal(BrownlabError, ValueError):
    def __init__(self, atom, residual):
        self.atom = atom
        self.residual = residual
        super().__init__(f"block {atom} is not normal (residual {residual:.3e})")


class DomainError(BrownlabError, ValueError):
    pass


class ConvergenceFailure(BrownlabError, RuntimeError):
    """QR iteration did not converge.

    ``diagnostics`` holds the iteration count, the active window and the
    size of the subdiagonal entry that refused to deflate.
    """

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        super().__init__(f"{message} {diagnostics}")


class OracleFailure(BrownlabError, RuntimeError):
    def __init__(self, atom, cause):
        self.atom = atom
        self.cause = cause
        super().__init__(f"eigenvalue oracle failed on block {atom}: {cause}")


class EigenspaceOrthogonalizationFailure(BrownlabError, RuntimeError):
    pass


class EmptySpace(BrownlabError, ValueError):
    pass


class NonpositiveWeight(BrownlabError, ValueError):
    pass


class DimensionMismatch(BrownlabError, ValueError):
    pass


class AlgebraMismatch(BrownlabError, ValueError):
    pass


class RuleFailure(BrownlabError, RuntimeError):
    def __init__(self, index, cause):
        self.index = index
        self.cause = cause
        super().__init__(f"block rule failed at index {index}: {cause}")


class NonpositiveEpsilon(BrownlabError, ValueError):
    pass


class LambdaTooLarge(BrownlabError, ValueError):
    pass


class RegionTooSmall(BrownlabError, ValueError):
    pass


class NonpositiveM(BrownlabError, ValueError):
    pass


class ScheduleEmpty(BrownlabError, ValueError):
    pass


class ProbeOnSupport(BrownlabError, ValueError):
    pass


class ParseError(BrownlabError, ValueError):
    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"line {line}, column {column}: {message}")


class UnknownSuite(BrownlabError, ValueError):
    pass
