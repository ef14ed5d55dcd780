"""Exception hierarchy.

Validation problems derive from ``ProjUniformError`` directly; numerical
breakdowns derive from ``NumericalError`` so callers (the CLI in
particular) can map them to a distinct exit status.
"""


class ProjUniformError(Exception):
    pass


class UnsupportedSpace(ProjUniformError, ValueError):
    pass


class ZeroVector(ProjUniformError, ValueError):
    pass


class MixedSpaces(ProjUniformError, ValueError):
    pass


class DomainError(ProjUniformError, ValueError):
    pass


class InsufficientData(ProjUniformError, ValueError):
    pass


class DegenerateEnsemble(ProjUniformError, ValueError):
    pass


class PointFileError(ProjUniformError, ValueError):
    pass


class NumericalError(ProjUniformError, ArithmeticError):
    pass


class NonIntegerMultiplicity(NumericalError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass


class TruncationFailure(NumericalError):
    pass


class PartitionNonConvergence(NumericalError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RejectionStall(NumericalError):
    pass


class NegativeSchur(NumericalError):
    pass
