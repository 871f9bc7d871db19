"""Exception hierarchy shared by every module of the package."""


class CantorCertError(Exception):
    """Base class for all errors raised by cantorcert."""


class DomainError(CantorCertError, ValueError):
    pass


class NegativeDomain(DomainError):
    pass


class InvalidAddress(CantorCertError, IndexError):
    pass


class InvalidSet(CantorCertError, ValueError):
    pass


class EmptyRestriction(CantorCertError):
    pass


class MalformedSpec(CantorCertError, ValueError):
    pass


class UnknownVertex(CantorCertError, KeyError):
    pass


class DuplicatePoint(CantorCertError, ValueError):
    pass


class BudgetExhausted(CantorCertError):
    """The search ran out of budget. This is not a proof of non-coverage."""


class AdmissibilityFailure(CantorCertError):
    pass


class DegeneratePin(CantorCertError):
    pass


class NotEnoughCells(CantorCertError):
    pass


class SkeletonConflict(CantorCertError):
    pass


class EmptyIntersection(CantorCertError):
    pass


class DepthTooLarge(CantorCertError, ValueError):
    pass


class NoRealization(CantorCertError):
    def __init__(self, message, best_error=None):
        super().__init__(message)
        self.best_error = best_error


class ConfigError(CantorCertError, ValueError):
    pass
