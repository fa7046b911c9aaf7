"""Exception types raised across the package."""


class QbretError(Exception):
    """Base class for all qbret errors."""


# --- matrix core ---

class DimensionMismatch(QbretError):
    pass


class NotHermitian(QbretError):
    pass


class NoConvergence(QbretError):
    pass


class NotPSD(QbretError):
    pass


class Singular(QbretError):
    pass


class SpectrumNotNonnegative(QbretError):
    pass


class SingularForNegativePower(QbretError):
    pass


class ComplexResidue(QbretError):
    pass


# --- frames ---

class NotNQPR(QbretError):
    pass


class ParseError(QbretError):
    pass


class ValidationFailed(QbretError):
    """Carries the name of the first violated frame invariant."""

    def __init__(self, check: str, violation: float, tol: float):
        self.check = check
        self.violation = violation
        self.tol = tol
        super().__init__(f"frame validation failed: {check} "
                         f"(violation {violation:.3e} > tol {tol:.3e})")


# --- Hilbert side ---

class NotUnitary(QbretError):
    pass


class BadAncilla(QbretError):
    pass


class SingularPosterior(QbretError):
    pass


class SingularState(QbretError):
    pass


# --- quasiprobability side ---

class RepMismatch(QbretError):
    pass


class UnsupportedKind(QbretError):
    pass
