"""Exception hierarchy shared by every module of the package."""


class DualSisoError(ValueError):
    """Base class for all errors raised by dualsiso."""


class NotPrime(DualSisoError):
    pass


class ReduciblePolynomial(DualSisoError):
    pass


class UnsupportedSize(DualSisoError):
    pass


class ZeroScalar(DualSisoError):
    """Raised when a multiplicative permutation by 0 is requested."""


class FieldMismatch(DualSisoError):
    pass


class DivisionByZero(DualSisoError, ZeroDivisionError):
    pass


class NoConstantTerm(DualSisoError):
    pass


class SearchExhausted(DualSisoError):
    pass


class UnsupportedCode(DualSisoError):
    pass


class TooManyStates(DualSisoError):
    pass


class LengthMismatch(DualSisoError):
    pass


class NotTerminated(DualSisoError):
    pass


class AllZeroMass(DualSisoError, ArithmeticError):
    """A probability vector lost all of its mass (numerical underflow)."""


class NonBinaryExtension(DualSisoError):
    """BPSK bit mapping requested for a field whose size is not a power of 2."""
