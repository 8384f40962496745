"""Exception types shared across the package."""


class LoopnetError(Exception):
    """Base class for library errors."""


class PosetInvalid(LoopnetError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class PosetTooLarge(LoopnetError):
    pass


class UnknownElement(LoopnetError, KeyError):
    def __str__(self):
        return f"unknown element: {self.args[0]!r}"


class InvalidSimplex(LoopnetError):
    pass


class NotTangent(LoopnetError):
    pass


class NotAPath(LoopnetError):
    pass


class NotALoop(LoopnetError):
    pass


class BudgetExceeded(LoopnetError):
    pass


class ObstructedOrbit(LoopnetError):
    def __init__(self, message, orbit=None, stabilizer=None):
        super().__init__(message)
        self.orbit = orbit
        self.stabilizer = stabilizer


class SupportViolation(LoopnetError):
    pass


class NoInvariantFrame(LoopnetError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class QuadratureNotConverged(LoopnetError):
    pass


class CertificateInvalid(LoopnetError):
    pass


class NotConnected(LoopnetError):
    pass


class EmptyPoset(LoopnetError):
    pass
