"""Exception hierarchy shared by all modules."""


class ArithPDEError(Exception):
    """Base class for library errors."""


class ContextMismatch(ArithPDEError):
    pass


class DivisionByNonUnit(ArithPDEError):
    pass


class PrecisionExhausted(ArithPDEError):
    pass


class NotOneUnit(ArithPDEError):
    pass


class ShiftBudgetExceeded(ArithPDEError):
    pass


class DirectionMismatch(ArithPDEError):
    pass


class NonUnitConstantTerm(ArithPDEError):
    pass


class NonzeroConstantTerm(ArithPDEError):
    pass


class NonIntegralCoefficient(ArithPDEError):
    pass


class NotRootOfUnity(ArithPDEError):
    pass


class MixedSigns(ArithPDEError):
    pass


class InsufficientTruncation(ArithPDEError):
    pass


class NotDivisible(ArithPDEError):
    pass


class DegreeExceeded(ArithPDEError):
    pass


class Inconsistent(ArithPDEError):
    pass


class InsufficientOrder(ArithPDEError):
    pass


class Degenerate(ArithPDEError):
    pass


class NonUnitDenominator(ArithPDEError):
    pass


class NotUnitSeries(ArithPDEError):
    pass


class NotFormalPoint(ArithPDEError):
    pass


class NonzeroResidual(ArithPDEError):
    pass


class SupportNotTotallyNonCharacteristic(ArithPDEError):
    pass


class NonUnitLead(ArithPDEError):
    pass


class NoConvergence(ArithPDEError):
    pass


class MultipleCharacteristicIntegers(ArithPDEError):
    pass


class DatumOutsideRange(ArithPDEError):
    pass


class ReductionUndefined(ArithPDEError):
    pass


class TorsionAtIdentity(ArithPDEError):
    pass


class ParseError(ArithPDEError):
    pass
