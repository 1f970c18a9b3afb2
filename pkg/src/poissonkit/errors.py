"""Exception hierarchy shared by all modules.

The CLI maps :class:`InputError` to exit code 2, :class:`NumericAbort` to exit
code 3, and everything raised as :class:`VerificationError` to exit code 1.
"""


class PoissonKitError(Exception):
    """Base class."""


class InputError(PoissonKitError):
    """Malformed or inconsistent user input."""


class ParseError(InputError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class UnknownIdentifierError(ParseError):
    def __init__(self, name, position=None, text=None):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position, text)


class ChartMismatch(InputError):
    pass


class DimensionError(InputError):
    pass


class DimensionTooLarge(InputError):
    pass


class NumericAbort(PoissonKitError):
    """A numeric computation could not proceed (domain error, blow-up)."""


class DomainError(NumericAbort):
    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        super().__init__(message)


class UnboundSymbolError(InputError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"symbol {name!r} has no value")


class UndecidableError(NumericAbort):
    """Every sample point hit a singularity."""


class SingularMatrixError(NumericAbort):
    pass


class VerificationError(PoissonKitError):
    """A mathematical precondition or identity failed."""

    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)


class DegenerateStructure(VerificationError):
    pass


class DegenerateDelta(VerificationError):
    def __init__(self, message, det=None, verdict=None):
        self.det = det
        super().__init__(message, verdict)


class NotClosed(VerificationError):
    pass


class NonPolynomialEntry(InputError):
    pass


class NotHamiltonian(VerificationError):
    pass


class NotACasimir(VerificationError):
    pass


class NotFirstIntegral(VerificationError):
    pass


class StructureConstantError(VerificationError):
    pass


class StepLimitExceeded(VerificationError):
    pass


class OddConstraintCount(InputError):
    pass


class OffSurfaceError(InputError):
    pass
